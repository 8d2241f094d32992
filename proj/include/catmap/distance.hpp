#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"

namespace catmap {

enum class Measure { overlap, jaccard, dice, manhattan_onehot, euclidean_onehot };

inline constexpr Measure kAllMeasures[] = {Measure::overlap, Measure::jaccard, Measure::dice,
                                           Measure::manhattan_onehot, Measure::euclidean_onehot};

inline std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::overlap: return "overlap";
        case Measure::jaccard: return "jaccard";
        case Measure::dice: return "dice";
        case Measure::manhattan_onehot: return "manhattan";
        case Measure::euclidean_onehot: return "euclidean";
    }
    return "?";
}

inline std::optional<Measure> parse_measure(std::string_view name) {
    for (auto m : kAllMeasures)
        if (to_string(m) == name) return m;
    if (name == "manhattan_onehot") return Measure::manhattan_onehot;
    if (name == "euclidean_onehot") return Measure::euclidean_onehot;
    return std::nullopt;
}

/// Dissimilarity of two items with `shared` common categories out of
/// `attributes`. Set measures are 1 - similarity; with equal cardinalities
/// |X| = |Y| = a, overlap k/min(|X|,|Y|) and Dice 2k/(|X|+|Y|) both reduce to k/a.
inline double distance_from_shared(std::size_t shared, std::size_t attributes, Measure m) {
    const double k = static_cast<double>(shared);
    const double a = static_cast<double>(attributes);
    switch (m) {
        case Measure::overlap: return 1.0 - k / a;
        case Measure::jaccard: return 1.0 - k / (2.0 * a - k);
        case Measure::dice: return 1.0 - (2.0 * k) / (a + a);
        case Measure::manhattan_onehot: return 2.0 * (a - k);
        case Measure::euclidean_onehot: return std::sqrt(2.0 * (a - k));
    }
    return 0.0;
}

inline double distance(const EncodedItem& x, const EncodedItem& y, Measure m) {
    if (x.set_form.size() != y.set_form.size() || x.onehot_form.size() != y.onehot_form.size())
        throw Error("schema_mismatch", "items were encoded under different schemas");
    if (x.set_form.empty()) throw Error("schema_mismatch", "items have no attributes");
    std::size_t shared = 0;
    auto i = x.set_form.begin();
    auto j = y.set_form.begin();
    while (i != x.set_form.end() && j != y.set_form.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++shared;
            ++i;
            ++j;
        }
    }
    return distance_from_shared(shared, x.set_form.size(), m);
}

/// Dense symmetric n x n matrix with zero diagonal, stored row-major.
class DissimilarityMatrix {
public:
    DissimilarityMatrix() = default;

    DissimilarityMatrix(std::size_t n, std::optional<Measure> measure = std::nullopt)
        : n_(n), values_(n * n, 0.0), measure_(measure) {}

    /// Wraps arbitrary values, checking symmetry, zero diagonal and finiteness.
    static DissimilarityMatrix from_values(std::size_t n, std::vector<double> values,
                                           std::optional<Measure> measure = std::nullopt) {
        if (values.size() != n * n)
            throw Error("bad_matrix", "expected " + std::to_string(n * n) + " values");
        DissimilarityMatrix d(n, measure);
        d.values_ = std::move(values);
        for (std::size_t i = 0; i < n; ++i) {
            if (d(i, i) != 0.0) throw Error("bad_matrix", "diagonal must be zero");
            for (std::size_t j = 0; j < n; ++j) {
                double v = d(i, j);
                if (!std::isfinite(v) || v < 0.0)
                    throw Error("bad_matrix", "entries must be finite and non-negative");
                if (v != d(j, i)) throw Error("bad_matrix", "matrix is not symmetric");
            }
        }
        return d;
    }

    std::size_t size() const noexcept { return n_; }
    std::optional<Measure> measure() const noexcept { return measure_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, double v) noexcept {
        values_[i * n_ + j] = v;
        values_[j * n_ + i] = v;
    }

    const std::vector<double>& values() const noexcept { return values_; }

    double max_value() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, v);
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
    std::optional<Measure> measure_;
};

inline DissimilarityMatrix build_matrix(const SubsetTable& subsets, Measure m) {
    const std::size_t n = subsets.size();
    if (n < 2) throw Error("too_few_subsets", "a dissimilarity matrix needs at least 2 subsets");
    std::vector<EncodedItem> items;
    items.reserve(n);
    for (const auto& s : subsets.subsets) items.push_back(encode(s.values, subsets.schema));
    DissimilarityMatrix d(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, distance(items[i], items[j], m));
    return d;
}

inline void write_matrix_csv(std::ostream& out, const DissimilarityMatrix& d) {
    char buf[32];
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", d(i, j));
            out << buf;
        }
        out << '\n';
    }
}

namespace detail {

inline void put_le64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(v >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline std::uint64_t get_le64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
        throw Error("bad_matrix", "truncated binary matrix");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return v;
}

}  // namespace detail

/// Binary dump: little-endian u64 n, then n*n little-endian IEEE-754 doubles, row-major.
inline void write_matrix_binary(std::ostream& out, const DissimilarityMatrix& d) {
    detail::put_le64(out, d.size());
    for (double v : d.values()) detail::put_le64(out, std::bit_cast<std::uint64_t>(v));
}

inline DissimilarityMatrix read_matrix_binary(std::istream& in) {
    const auto n = static_cast<std::size_t>(detail::get_le64(in));
    std::vector<double> values(n * n);
    for (auto& v : values) v = std::bit_cast<double>(detail::get_le64(in));
    return DissimilarityMatrix::from_values(n, std::move(values));
}

}  // namespace catmap
