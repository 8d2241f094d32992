#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "catmap/dataset.hpp"
#include "catmap/error.hpp"

namespace catmap {

struct SelectionResult {
    std::vector<std::size_t> selected;                            // ascending, unique
    std::vector<std::pair<std::size_t, std::uint32_t>> common;    // (attribute, category)
    std::vector<std::size_t> distinct;                            // attributes not uniform
    std::vector<std::size_t> matching;                            // ascending
};

/// Categories shared by every selected subset and all subsets that agree with
/// them. `attribute_order` orders both attribute lists; empty means schema order.
inline SelectionResult common_categories(const SubsetTable& subsets, std::vector<std::size_t> ids,
                                         std::vector<std::size_t> attribute_order = {}) {
    if (ids.empty()) throw Error("empty_selection", "selection is empty");
    for (auto id : ids)
        if (id >= subsets.size()) throw Error("unknown_id", "no subset with id " + std::to_string(id));
    const std::size_t attrs = subsets.schema.attribute_count();
    if (attribute_order.empty()) {
        attribute_order.resize(attrs);
        std::iota(attribute_order.begin(), attribute_order.end(), std::size_t{0});
    }
    if (attribute_order.size() != attrs) throw Error("bad_order", "attribute order must list every attribute");

    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    SelectionResult r;
    r.selected = ids;
    for (auto a : attribute_order) {
        const auto c = subsets.subsets[ids.front()].values[a];
        const bool uniform =
            std::all_of(ids.begin(), ids.end(), [&](std::size_t i) { return subsets.subsets[i].values[a] == c; });
        if (uniform)
            r.common.emplace_back(a, c);
        else
            r.distinct.push_back(a);
    }
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        const auto& v = subsets.subsets[i].values;
        if (std::all_of(r.common.begin(), r.common.end(), [&](const auto& ac) { return v[ac.first] == ac.second; }))
            r.matching.push_back(i);
    }
    return r;
}

}  // namespace catmap
