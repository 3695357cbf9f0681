// meshforge command-line tool: dataset generation, training, smoothing and
// ablation studies.

#include "meshforge/app/ablate.hpp"
#include "meshforge/app/config.hpp"
#include "meshforge/app/smooth.hpp"
#include "meshforge/data/dataset.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace meshforge;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_bad_input = 2;
constexpr int exit_diverged = 3;

struct GenerateArgs {
    std::string kind = "delaunay2d";
    int meshes = 20;
    int points = 500;
    double jitter = 0.3;
    int targets = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool force = false;
};

struct TrainArgs {
    std::string agent;
    std::string data;
    long steps = 20000;
    std::uint64_t seed = 0;
    std::string config;
    std::vector<std::string> set;
    std::string out;
    std::string curve;
    bool no_surface_reward = false;
};

struct SmoothArgs {
    std::string mesh;
    std::string method = "smart";
    std::string bundle;
    std::string flip_bundle;
    int sweeps = 10;
    std::string out;
    std::string report;
    bool no_guard = false;
};

struct AblateArgs {
    std::string study;
    std::string data;
    std::string eval;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    long steps = 20000;
    std::string config;
    std::vector<std::string> set;
    std::string out;
};

app::TrainSettings settings_from(const std::string& config, const std::vector<std::string>& overrides) {
    app::TrainSettings s = app::load_config(config);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw app::InputError("--set expects key=value, got '" + kv + "'");
        app::apply_setting(s, app::detail::trim(kv.substr(0, eq)), app::detail::trim(kv.substr(eq + 1)));
    }
    return s;
}

Dataset load_data(const std::string& dir) {
    try {
        return load_dataset(dir);
    } catch (const std::invalid_argument& e) {
        throw app::InputError(e.what());
    } catch (const MeshError& e) {
        throw app::InputError(e.what());
    }
}

int cmd_generate(const GenerateArgs& a) {
    DatasetOptions o;
    try {
        o.kind = dataset_kind_from_string(a.kind);
    } catch (const std::invalid_argument& e) {
        throw app::InputError(e.what());
    }
    o.meshes = a.meshes;
    o.points = a.points;
    o.jitter = a.jitter;
    o.targets = a.targets;
    o.seed = a.seed;
    try {
        const Dataset d = generate_dataset(o);
        save_dataset(d, a.out, a.force);
        std::cout << "wrote " << d.meshes.size() << " meshes (" << d.manifest["nodes"] << " nodes, "
                  << d.manifest["interior_nodes"] << " interior) to " << a.out << '\n';
    } catch (const std::invalid_argument& e) {
        throw app::InputError(e.what());
    }
    return exit_ok;
}

int cmd_train(const TrainArgs& a) {
    app::TrainSettings s = settings_from(a.config, a.set);
    const Dataset d = load_data(a.data);
    const int dim = d.meshes.front().dim();
    if (a.steps < 1) throw app::InputError("--steps must be positive");
    agents::TrainResult res;
    try {
        if (a.agent == "smoother" || a.agent == "smoother3d") {
            if (a.agent == "smoother" && dim != 2) throw app::InputError("train smoother needs a 2D dataset");
            if (a.agent == "smoother3d" && dim != 3) throw app::InputError("train smoother3d needs a surface dataset");
            if (a.no_surface_reward) s.smoother.env.surface_reward = false;
            res = agents::train_smoother(d.shared(), s.smoother, a.steps, a.seed);
        } else {
            if (dim != 2) throw app::InputError("train flipper needs a 2D dataset");
            res = agents::train_flipper(d.shared(), s.flipper, a.steps, a.seed);
        }
    } catch (const std::invalid_argument& e) {
        throw app::InputError(e.what());
    }
    res.bundle.meta["data"] = a.data;
    nn::save_bundle(a.out, res.bundle);
    const std::string curve = a.curve.empty() ? a.out + ".csv" : a.curve;
    std::ofstream csv(curve);
    agents::write_curve_csv(csv, res.curve);
    std::cout << "final windowed reward " << res.final_window() << ", best " << res.top_window() << "\nwrote " << a.out
              << " and " << curve << '\n';
    return exit_ok;
}

int cmd_smooth(const SmoothArgs& a) {
    app::SmoothRequest req;
    req.method = app::method_from_string(a.method);
    req.sweeps = a.sweeps;
    req.rl.guard = !a.no_guard;
    TriMesh mesh;
    try {
        mesh = load_mesh(a.mesh);
        if (req.method == app::Method::Rl || req.method == app::Method::RlFlip) {
            if (a.bundle.empty()) throw app::InputError("method " + a.method + " needs --bundle");
            req.smoother = std::make_shared<SmootherPolicy>(nn::load_bundle(a.bundle));
        }
        if (req.method == app::Method::RlFlip) {
            if (a.flip_bundle.empty()) throw app::InputError("method rl+flip needs --flip-bundle");
            req.flipper = std::make_shared<FlipPolicy>(nn::load_bundle(a.flip_bundle));
        }
    } catch (const MeshError& e) {
        throw app::InputError(e.what());
    } catch (const nn::CheckpointError& e) {
        throw app::InputError(e.what());
    } catch (const std::invalid_argument& e) {
        throw app::InputError(e.what());
    }
    const auto out = app::run_smoothing(mesh, req);
    if (!a.out.empty()) save_mesh(mesh, a.out);
    const std::string text = out.report.dump(2);
    if (a.report.empty() || a.report == "-") {
        std::cout << text << '\n';
    } else {
        std::ofstream(a.report) << text << '\n';
        std::cout << a.method << ": q_min " << out.report["before"]["q_min"] << " -> " << out.report["after"]["q_min"]
                  << ", q_mean " << out.report["before"]["q_mean"] << " -> " << out.report["after"]["q_mean"] << '\n';
    }
    return exit_ok;
}

int cmd_ablate(const AblateArgs& a) {
    app::AblationRequest req;
    req.kind = app::ablation_from_string(a.study);
    req.base = settings_from(a.config, a.set);
    req.train = load_data(a.data).shared();
    if (req.train->front().dim() != 2) throw app::InputError("ablations run on 2D datasets");
    if (!a.eval.empty()) {
        req.eval = load_data(a.eval).meshes;
    } else if (req.kind != app::AblationKind::ActionRange) {
        // four held-out meshes, disjoint from any dataset seeded below 1000
        req.eval = build_training_set(4, 500, 1000);
    }
    req.seeds = a.seeds;
    req.steps = a.steps;
    req.workers = app::worker_count();
    req.log = [](const std::string& s) { std::cerr << s << '\n'; };
    const auto rows = app::run_ablation(req);
    std::ofstream out(a.out);
    app::write_ablation_csv(out, a.study, rows);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    std::cout << "wrote " << rows.size() << " rows to " << a.out << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Mesh smoothing with classical and learned smoothers"};
    cli.require_subcommand(1);

    GenerateArgs gen;
    auto* g = cli.add_subcommand("generate-data", "Generate a dataset directory of OFF meshes plus manifest.json");
    g->add_option("--kind", gen.kind, "delaunay2d, crafted, sphere, torus or saddle")->capture_default_str();
    g->add_option("--meshes", gen.meshes, "Number of meshes")->capture_default_str();
    g->add_option("--points", gen.points, "Interior points per 2D mesh, or surface grid resolution")->capture_default_str();
    g->add_option("--jitter", gen.jitter, "Surface node jitter as a fraction of the grid spacing")->capture_default_str();
    g->add_option("--targets", gen.targets, "Crafted kind: high-degree nodes per mesh (0 = points/50)");
    g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_flag("--force", gen.force, "Write into a non-empty directory");

    TrainArgs tr;
    auto* t = cli.add_subcommand("train", "Train a smoothing or flipping agent");
    t->add_option("agent", tr.agent, "smoother, flipper or smoother3d")
        ->required()
        ->check(CLI::IsMember({"smoother", "flipper", "smoother3d"}));
    t->add_option("--data", tr.data, "Dataset directory")->required();
    t->add_option("--steps", tr.steps, "Environment steps")->capture_default_str();
    t->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
    t->add_option("--config", tr.config, "key = value settings file");
    t->add_option("--set", tr.set, "Override one setting (key=value); repeatable");
    t->add_option("--out", tr.out, "Output policy bundle")->required();
    t->add_option("--curve", tr.curve, "Reward curve CSV (default: <out>.csv)");
    t->add_flag("--no-surface-reward", tr.no_surface_reward, "smoother3d: train without the surface-fitting reward");

    SmoothArgs sm;
    auto* s = cli.add_subcommand("smooth", "Smooth a mesh and report its quality");
    s->add_option("--mesh", sm.mesh, "Input mesh (.off or .obj)")->required();
    s->add_option("--method", sm.method, "laplacian, smart, angle, getme, opt, rl or rl+flip")->capture_default_str();
    s->add_option("--bundle", sm.bundle, "Smoothing policy bundle (rl, rl+flip)");
    s->add_option("--flip-bundle", sm.flip_bundle, "Flipping policy bundle (rl+flip)");
    s->add_option("--sweeps", sm.sweeps, "Sweeps over the interior nodes")->capture_default_str();
    s->add_option("--out", sm.out, "Write the smoothed mesh here");
    s->add_option("--report", sm.report, "JSON report path (default: stdout)");
    s->add_flag("--no-guard", sm.no_guard, "rl: keep policy moves that lower the local minimum quality");

    AblateArgs ab;
    auto* a = cli.add_subcommand("ablate", "Run an ablation study and write a mean/std CSV");
    a->add_option("study", ab.study, "action-range, reward or episode-length")
        ->required()
        ->check(CLI::IsMember({"action-range", "reward", "episode-length"}));
    a->add_option("--data", ab.data, "Training dataset directory")->required();
    a->add_option("--eval", ab.eval, "Held-out dataset directory (reward, episode-length)");
    a->add_option("--seeds", ab.seeds, "Training seeds")->delimiter(',')->capture_default_str();
    a->add_option("--steps", ab.steps, "Environment steps per run")->capture_default_str();
    a->add_option("--config", ab.config, "key = value settings file");
    a->add_option("--set", ab.set, "Override one setting (key=value); repeatable");
    a->add_option("--out", ab.out, "Summary CSV")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? exit_ok : exit_bad_input;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*t) return cmd_train(tr);
        if (*s) return cmd_smooth(sm);
        if (*a) return cmd_ablate(ab);
    } catch (const app::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_bad_input;
    } catch (const agents::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_diverged;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_bad_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_ok;
}
