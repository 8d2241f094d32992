#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catmap/error.hpp"

namespace catmap {

/// Category index per attribute, in schema attribute order.
using Assignment = std::vector<std::uint32_t>;

/// Category label given to missing cells so every row keeps one category per attribute.
inline constexpr std::string_view kMissingCategory = "<missing>";

struct Attribute {
    std::string name;
    std::vector<std::string> categories;
};

/// Attributes and their categories. Every category also has a globally unique
/// descriptor "attribute=category" with a dense id; ids of attribute i occupy
/// the contiguous block [offset(i), offset(i) + |C_i|).
class AttributeSchema {
public:
    AttributeSchema() = default;

    explicit AttributeSchema(std::vector<Attribute> attributes)
        : attributes_(std::move(attributes)) {
        std::size_t offset = 0;
        for (std::size_t a = 0; a < attributes_.size(); ++a) {
            const auto& attr = attributes_[a];
            if (attr.categories.empty())
                throw Error("empty_attribute", "attribute '" + attr.name + "' has no categories");
            offsets_.push_back(offset);
            for (std::size_t c = 0; c < attr.categories.size(); ++c) {
                auto [it, inserted] = descriptor_index_.emplace(
                    qualified(attr.name, attr.categories[c]), offset + c);
                if (!inserted)
                    throw Error("duplicate_descriptor", "descriptor '" + it->first + "' is not unique");
            }
            offset += attr.categories.size();
        }
        dimensionality_ = offset;
    }

    static std::string qualified(std::string_view attribute, std::string_view category) {
        std::string out(attribute);
        out += '=';
        out += category;
        return out;
    }

    std::size_t attribute_count() const noexcept { return attributes_.size(); }
    const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
    const Attribute& attribute(std::size_t a) const { return attributes_.at(a); }
    std::size_t category_count(std::size_t a) const { return attributes_.at(a).categories.size(); }

    /// Length of the one-hot encoding, the sum of all category counts.
    std::size_t dimensionality() const noexcept { return dimensionality_; }
    std::size_t offset(std::size_t a) const { return offsets_.at(a); }

    std::size_t descriptor_id(std::size_t a, std::uint32_t c) const { return offsets_.at(a) + c; }

    std::optional<std::size_t> find_descriptor(std::string_view qualified_name) const {
        auto it = descriptor_index_.find(std::string(qualified_name));
        if (it == descriptor_index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> find_attribute(std::string_view name) const {
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            if (attributes_[a].name == name) return a;
        return std::nullopt;
    }

    std::optional<std::uint32_t> find_category(std::size_t a, std::string_view name) const {
        const auto& cats = attributes_.at(a).categories;
        for (std::size_t c = 0; c < cats.size(); ++c)
            if (cats[c] == name) return static_cast<std::uint32_t>(c);
        return std::nullopt;
    }

    /// Throws unless the assignment names one valid category per attribute.
    void validate(const Assignment& values) const {
        if (values.size() != attributes_.size())
            throw Error("schema_mismatch", "assignment has " + std::to_string(values.size()) +
                                               " values, schema has " +
                                               std::to_string(attributes_.size()) + " attributes");
        for (std::size_t a = 0; a < values.size(); ++a)
            if (values[a] >= attributes_[a].categories.size())
                throw Error("unknown_category", "category id " + std::to_string(values[a]) +
                                                    " out of range for attribute '" +
                                                    attributes_[a].name + "'");
    }

    bool operator==(const AttributeSchema& other) const {
        if (attributes_.size() != other.attributes_.size()) return false;
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            if (attributes_[a].name != other.attributes_[a].name ||
                attributes_[a].categories != other.attributes_[a].categories)
                return false;
        return true;
    }

private:
    std::vector<Attribute> attributes_;
    std::vector<std::size_t> offsets_;
    std::unordered_map<std::string, std::size_t> descriptor_index_;
    std::size_t dimensionality_ = 0;
};

struct CategoricalTable {
    AttributeSchema schema;
    std::vector<Assignment> rows;

    std::size_t row_count() const noexcept { return rows.size(); }
};

struct Subset {
    Assignment values;
    std::uint64_t count = 0;
};

/// Unique category combinations with their frequencies. Subset ids are the
/// indices into `subsets`.
struct SubsetTable {
    AttributeSchema schema;
    std::vector<Subset> subsets;
    std::uint64_t total = 0;

    std::size_t size() const noexcept { return subsets.size(); }

    double relative_frequency(std::size_t id) const {
        return static_cast<double>(subsets.at(id).count) / static_cast<double>(total);
    }

    std::uint64_t max_count() const {
        std::uint64_t m = 0;
        for (const auto& s : subsets) m = std::max(m, s.count);
        return m;
    }

    /// Category of every subset for one attribute.
    std::vector<std::uint32_t> labels(std::size_t attribute) const {
        std::vector<std::uint32_t> out;
        out.reserve(subsets.size());
        for (const auto& s : subsets) out.push_back(s.values.at(attribute));
        return out;
    }
};

struct EncodedItem {
    std::vector<std::uint32_t> set_form;  // sorted descriptor ids
    std::vector<std::uint8_t> onehot_form;
};

struct CsvOptions {
    char delimiter = ',';
    std::string missing_token;
    bool allow_numeric = false;  // treat numeric-looking columns as categorical
};

namespace detail {

struct AssignmentHash {
    std::size_t operator()(const Assignment& a) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (auto v : a) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based physical line where the record starts
};

inline std::vector<CsvRecord> split_csv(std::string_view text, char delim) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_record = [&] {
        bool blank = current.fields.empty() && field.empty() && !field_started;
        if (!blank) {
            current.fields.push_back(std::move(field));
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        if (ch == '"' && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (ch == delim) {
            current.fields.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        } else if (ch == '\n') {
            end_record();
            ++line;
            current.line = line;
        } else {
            field += ch;
        }
    }
    if (in_quotes) throw Error("malformed_csv", "unterminated quoted field");
    end_record();
    return records;
}

inline bool looks_numeric(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses CSV text with a mandatory header row. Categories are numbered in
/// order of first appearance; missing-value tokens become `kMissingCategory`.
inline CategoricalTable parse_csv(std::string_view text, const CsvOptions& options = {}) {
    auto records = detail::split_csv(text, options.delimiter);
    if (records.empty()) throw Error("empty_table", "no header row");
    const auto& header = records.front().fields;
    const std::size_t width = header.size();

    std::vector<Attribute> attributes(width);
    std::vector<std::unordered_map<std::string, std::uint32_t>> lookup(width);
    for (std::size_t a = 0; a < width; ++a) attributes[a].name = header[a];
    for (std::size_t a = 0; a < width; ++a)
        for (std::size_t b = a + 1; b < width; ++b)
            if (header[a] == header[b])
                throw Error("duplicate_attribute", "attribute '" + header[a] + "' appears twice");

    std::vector<bool> numeric(width, true);
    std::vector<bool> seen_value(width, false);

    std::vector<Assignment> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != width)
            throw Error("ragged_row", "line " + std::to_string(rec.line) + ": expected " +
                                          std::to_string(width) + " fields, found " +
                                          std::to_string(rec.fields.size()));
        Assignment row(width);
        for (std::size_t a = 0; a < width; ++a) {
            std::string value = rec.fields[a];
            if (value == options.missing_token) {
                value = std::string(kMissingCategory);
            } else {
                seen_value[a] = true;
                if (numeric[a] && !detail::looks_numeric(value)) numeric[a] = false;
            }
            auto [it, inserted] = lookup[a].emplace(
                value, static_cast<std::uint32_t>(attributes[a].categories.size()));
            if (inserted) attributes[a].categories.push_back(value);
            row[a] = it->second;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("empty_table", "table has a header but no data rows");
    if (!options.allow_numeric)
        for (std::size_t a = 0; a < width; ++a)
            if (numeric[a] && seen_value[a])
                throw Error("numeric_column",
                            "column '" + header[a] +
                                "' is numeric; declare it categorical to include it");

    return CategoricalTable{AttributeSchema(std::move(attributes)), std::move(rows)};
}

inline CategoricalTable load_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("unreadable_file", "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), options);
}

/// One subset per distinct row, in first-appearance order.
inline SubsetTable deduplicate(const CategoricalTable& table) {
    if (table.rows.empty()) throw Error("empty_table", "cannot deduplicate an empty table");
    SubsetTable out{table.schema, {}, table.rows.size()};
    std::unordered_map<Assignment, std::size_t, detail::AssignmentHash> index;
    for (const auto& row : table.rows) {
        auto [it, inserted] = index.emplace(row, out.subsets.size());
        if (inserted) out.subsets.push_back(Subset{row, 0});
        ++out.subsets[it->second].count;
    }
    return out;
}

/// Repeats every subset by its frequency; the inverse of `deduplicate` up to row order.
inline CategoricalTable expand(const SubsetTable& subsets) {
    CategoricalTable out{subsets.schema, {}};
    out.rows.reserve(subsets.total);
    for (const auto& s : subsets.subsets)
        for (std::uint64_t i = 0; i < s.count; ++i) out.rows.push_back(s.values);
    return out;
}

inline EncodedItem encode(const Assignment& values, const AttributeSchema& schema) {
    schema.validate(values);
    EncodedItem item;
    item.onehot_form.assign(schema.dimensionality(), 0);
    item.set_form.reserve(values.size());
    for (std::size_t a = 0; a < values.size(); ++a) {
        auto id = schema.descriptor_id(a, values[a]);
        item.set_form.push_back(static_cast<std::uint32_t>(id));
        item.onehot_form[id] = 1;
    }
    // Blocks are laid out in attribute order, so ids are already ascending.
    return item;
}

}  // namespace catmap
