#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "catmap/distance.hpp"
#include "catmap/quality.hpp"
#include "oracles.hpp"

using namespace catmap;

namespace {

/// Similarity coefficients by set arithmetic on the descriptor strings.
double set_distance(const AttributeSchema& s, const Assignment& x, const Assignment& y, Measure m) {
    const double k = static_cast<double>(oracle::shared(s, x, y));
    const double a = static_cast<double>(x.size());
    switch (m) {
        case Measure::overlap: return 1.0 - k / std::min(a, a);
        case Measure::jaccard: return 1.0 - k / (a + a - k);
        case Measure::dice: return 1.0 - 2.0 * k / (a + a);
        case Measure::manhattan_onehot: {
            auto ex = encode(x, s), ey = encode(y, s);
            double d = 0;
            for (std::size_t i = 0; i < ex.onehot_form.size(); ++i)
                d += std::abs(double(ex.onehot_form[i]) - double(ey.onehot_form[i]));
            return d;
        }
        case Measure::euclidean_onehot: {
            auto ex = encode(x, s), ey = encode(y, s);
            double d = 0;
            for (std::size_t i = 0; i < ex.onehot_form.size(); ++i) {
                const double t = double(ex.onehot_form[i]) - double(ey.onehot_form[i]);
                d += t * t;
            }
            return std::sqrt(d);
        }
    }
    return NAN;
}

}  // namespace

TEST(Distance, MatchesSetArithmetic) {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 500; ++rep) {
        auto s = oracle::random_schema(rng, 2 + rng() % 21);
        auto x = oracle::random_assignment(rng, s), y = oracle::random_assignment(rng, s);
        auto ex = encode(x, s), ey = encode(y, s);
        for (auto m : kAllMeasures) EXPECT_NEAR(distance(ex, ey, m), set_distance(s, x, y, m), 1e-15);
    }
}

TEST(Distance, Identities) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 1000; ++rep) {
        auto s = oracle::random_schema(rng, 2 + rng() % 21);
        auto x = oracle::random_assignment(rng, s), y = oracle::random_assignment(rng, s);
        auto ex = encode(x, s), ey = encode(y, s);
        std::size_t hamming = 0;
        for (std::size_t a = 0; a < x.size(); ++a) hamming += x[a] != y[a];
        EXPECT_EQ(distance(ex, ey, Measure::dice), distance(ex, ey, Measure::overlap));
        EXPECT_EQ(distance(ex, ey, Measure::manhattan_onehot), 2.0 * static_cast<double>(hamming));
        EXPECT_EQ(distance(ex, ex, Measure::jaccard), 0.0);
    }
}

TEST(Distance, WorkedExample) {
    auto t = parse_csv("colour,size\nred,small\nred,large\nblue,large\n");
    auto a = encode(t.rows[0], t.schema), b = encode(t.rows[1], t.schema), c = encode(t.rows[0], t.schema);
    EXPECT_DOUBLE_EQ(distance(a, b, Measure::overlap), 0.5);
    EXPECT_DOUBLE_EQ(distance(a, b, Measure::jaccard), 1.0 - 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(distance(a, b, Measure::manhattan_onehot), 2.0);
    EXPECT_DOUBLE_EQ(distance(a, b, Measure::euclidean_onehot), std::sqrt(2.0));
    EXPECT_EQ(distance(a, c, Measure::euclidean_onehot), 0.0);
}

TEST(Distance, SchemaMismatch) {
    EncodedItem a{{0, 2}, {1, 0, 1, 0}}, b{{0}, {1, 0}};
    EXPECT_THROW(distance(a, b, Measure::overlap), Error);
}

TEST(Distance, MeasuresRankAgree) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto schema = oracle::random_schema(rng, 2 + rng() % 10, 3);
        CategoricalTable t{schema, {}};
        for (int r = 0; r < 30; ++r) t.rows.push_back(oracle::random_assignment(rng, schema));
        auto s = deduplicate(t);
        if (s.size() < 3) continue;
        auto base = build_matrix(s, Measure::overlap);
        oracle::Matrix mb(s.size(), std::vector<double>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < s.size(); ++j) mb[i][j] = base(i, j);
        if (base.max_value() == 0.0) continue;
        for (auto m : kAllMeasures) {
            auto d = build_matrix(s, m);
            oracle::Matrix md = mb;
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = 0; j < s.size(); ++j) md[i][j] = d(i, j);
            EXPECT_NEAR(oracle::spearman(mb, md), 1.0, 1e-12) << to_string(m);
        }
    }
}

TEST(Matrix, ValidatesInput) {
    EXPECT_THROW(DissimilarityMatrix::from_values(2, {0, 1, 2, 0}), Error);
    EXPECT_THROW(DissimilarityMatrix::from_values(2, {1, 1, 1, 0}), Error);
    EXPECT_THROW(DissimilarityMatrix::from_values(2, {0, -1, -1, 0}), Error);
    EXPECT_THROW(DissimilarityMatrix::from_values(2, {0, NAN, NAN, 0}), Error);
    auto d = DissimilarityMatrix::from_values(2, {0, 3, 3, 0});
    EXPECT_EQ(d(1, 0), 3.0);
}

TEST(Matrix, TooFewSubsets) {
    auto s = deduplicate(parse_csv("a\nx\nx\n"));
    EXPECT_THROW(build_matrix(s, Measure::overlap), Error);
}

TEST(Matrix, BinaryRoundTrip) {
    auto s = deduplicate(load_csv(std::string(CATMAP_TEST_DATA) + "/titanic.csv"));
    auto d = build_matrix(s, Measure::jaccard);
    std::stringstream ss;
    write_matrix_binary(ss, d);
    auto back = read_matrix_binary(ss);
    ASSERT_EQ(back.size(), d.size());
    EXPECT_EQ(back.values(), d.values());
    std::ostringstream csv;
    write_matrix_csv(csv, d);
    const auto text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 24);
}

TEST(Measure, Names) {
    for (auto m : kAllMeasures) EXPECT_EQ(parse_measure(to_string(m)), m);
    EXPECT_EQ(parse_measure("manhattan_onehot"), Measure::manhattan_onehot);
    EXPECT_FALSE(parse_measure("cosine"));
}
