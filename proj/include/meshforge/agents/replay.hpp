#pragma once

#include "meshforge/nn/graph.hpp"
#include "meshforge/util/random.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace meshforge::agents {

struct SmoothTransition {
    nn::Observation state;
    Vec3 action = Vec3::Zero();
    double reward = 0.0;
    nn::Observation next_state;
    bool done = false;
};

struct FlipTransition {
    nn::Observation state;
    int action = 0;
    double reward = 0.0;
    nn::Observation next_state;
    bool done = false;
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
        items_.reserve(std::min<std::size_t>(capacity, 4096));
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[next_] = std::move(item);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::vector<const T*> sample(std::size_t n, Rng& rng) const {
        if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
        std::vector<const T*> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[uniform_index(rng, items_.size())]);
        return out;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const T& operator[](std::size_t i) const { return items_[i]; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<T> items_;
};

}  // namespace meshforge::agents
