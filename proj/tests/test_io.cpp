#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace adjustkit;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Usage;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("adjustkit_io_" + name);
}

}  // namespace

TEST(DistIo, RoundTrip) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = gallery_random(4, 4, seed, 0.1);
        const auto back = parse_dist(format_dist(d));
        ASSERT_EQ(back.variables(), d.variables());
        for (std::size_t i = 0; i < d.size(); ++i) {
            EXPECT_NEAR(back.probabilities()[i], d.probabilities()[i], 1e-15);
        }
    }
    const auto path = temp_file("dist.json");
    write_dist(gallery_hardness(0.04, 0.4), path.string());
    EXPECT_EQ(read_dist(path.string()).probabilities()[0], gallery_hardness(0.04, 0.4).probabilities()[0]);
    std::filesystem::remove(path);
}

TEST(DistIo, ParseErrors) {
    EXPECT_EQ(code_of([] { parse_dist("{\"variables\": ["); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_dist("[]"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_dist(R"({"variables":[{"name":"A"}],"probabilities":[1]})"); }),
              ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_dist(R"({"variables":[{"name":"A","cardinality":2}],"probabilities":[1,"x"]})"); }),
              ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_dist(R"({"variables":[{"name":"A","cardinality":2}],"probabilities":[0.5,0.6]})"); }),
              ErrorCode::NotNormalized);
    EXPECT_EQ(code_of([] { read_dist("/nonexistent/dir/file.json"); }), ErrorCode::Io);
}

TEST(DataIo, RoundTrip) {
    const auto d = gallery_random(3, 4, 2);
    const auto data = sample(d, 500, 3);
    const auto back = parse_data(format_data(data), d.variables());
    EXPECT_EQ(back.variables(), data.variables());
    EXPECT_TRUE(std::equal(back.cells().begin(), back.cells().end(), data.cells().begin(), data.cells().end()));

    const auto path = temp_file("data.csv");
    write_data(data, path.string());
    EXPECT_EQ(read_data(path.string(), d.variables()).rows(), 500U);
    std::filesystem::remove(path);
}

TEST(DataIo, InfersCardinalities) {
    const auto data = parse_data("A,B\n0,2\n1,0\n0,1\n");
    ASSERT_EQ(data.variables().size(), 2U);
    EXPECT_EQ(data.variables()[0].cardinality, 2U);
    EXPECT_EQ(data.variables()[1].cardinality, 3U);
    EXPECT_EQ(data.rows(), 3U);
    EXPECT_EQ(parse_data("A,B\r\n1,1\r\n").rows(), 1U);
    EXPECT_EQ(parse_data("A\n").rows(), 0U);
}

TEST(DataIo, ParseErrors) {
    const std::vector<VariableSpec> schema{{"A", 2}, {"B", 2}};
    EXPECT_EQ(code_of([] { parse_data(""); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_data("A,,B\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([&] { parse_data("A,C\n0,0\n", schema); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([&] { parse_data("A\n0\n", schema); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([&] { parse_data("A,B\n0,2\n", schema); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_data("A,B\n0\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_data("A,B\n0,x\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_data("A,B\n0,-1\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_data("A,A\n0,1\n"); }), ErrorCode::ParseError);
}
