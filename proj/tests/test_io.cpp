#include "meshforge/data/delaunay.hpp"
#include "meshforge/mesh/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace meshforge;

TEST(Io, ReadsUnitSquareOff) {
    std::istringstream in("OFF\n# square\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n");
    const TriMesh m = read_mesh(in, MeshFormat::OFF);
    EXPECT_EQ(m.node_count(), 4u);
    EXPECT_EQ(m.triangle_count(), 2u);
    EXPECT_EQ(m.dim(), 2);
}

TEST(Io, QuadFaceIsRejectedWithLineNumber) {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    try {
        read_mesh(in, MeshFormat::OBJ, "quad.obj");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5u);
        EXPECT_NE(std::string(e.what()).find("non-triangular face"), std::string::npos);
    }
}

TEST(Io, OutOfRangeIndexIsRejected) {
    std::istringstream in("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
    try {
        read_mesh(in, MeshFormat::OFF);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 6u);
    }
}

TEST(Io, MalformedInput) {
    std::istringstream a("OFF\n3 1 0\n0 0 0\n1 0\n");
    EXPECT_THROW(read_mesh(a, MeshFormat::OFF), ParseError);
    std::istringstream b("NOPE\n");
    EXPECT_THROW(read_mesh(b, MeshFormat::OFF), ParseError);
    std::istringstream c("v 0 0 0\nf 1 x 2\n");
    EXPECT_THROW(read_mesh(c, MeshFormat::OBJ), ParseError);
}

TEST(Io, RoundTripBothFormats) {
    const TriMesh m = delaunay_mesh(1000, 42);
    for (MeshFormat f : {MeshFormat::OFF, MeshFormat::OBJ}) {
        std::stringstream s;
        write_mesh(s, m, f);
        const TriMesh back = read_mesh(s, f);
        EXPECT_EQ(back.triangles(), m.triangles());
        ASSERT_EQ(back.node_count(), m.node_count());
        for (std::size_t i = 0; i < m.node_count(); ++i) {
            EXPECT_LT((back.nodes()[i] - m.nodes()[i]).norm(), 1e-9);
        }
    }
}

TEST(Io, ThreeDimensionalFileIsDetected) {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0.5\nf 1 2 3\n");
    EXPECT_EQ(read_mesh(in, MeshFormat::OBJ).dim(), 3);
}
