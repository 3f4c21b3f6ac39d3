#include "sdiv/dataset.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sdiv/errors.hpp"

namespace sdiv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

long long parse_integer(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError("expected an integer, got '" + std::string(field) + "'", line, name);
    return v;
}

void insert_cell(std::map<Support, std::uint64_t>& cells, long long x, long long count, std::size_t line) {
    if (x < 0) throw ParseError("support point must be non-negative", line, "x");
    if (count <= 0) throw NonPositiveCount(static_cast<unsigned long long>(x), count);
    if (!cells.emplace(static_cast<Support>(x), static_cast<std::uint64_t>(count)).second)
        throw DuplicateSupportPoint(static_cast<unsigned long long>(x));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text) {
    std::map<Support, std::uint64_t> cells;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            const auto comma = line.find(',');
            if (comma == std::string_view::npos || trim(line.substr(0, comma)) != "x" ||
                trim(line.substr(comma + 1)) != "count")
                throw ParseError("header must be 'x,count'", line_no, "");
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) throw ParseError("expected two fields", line_no, "count");
        const long long x = parse_integer(line.substr(0, comma), line_no, "x");
        const long long count = parse_integer(line.substr(comma + 1), line_no, "count");
        insert_cell(cells, x, count, line_no);
    }
    if (cells.empty()) throw ParseError("dataset has no records", line_no, "");
    return Dataset{"", "", FrequencyTable(cells)};
}

Dataset parse_dataset_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 1, "");
    }
    if (!j.is_object() || !j.contains("cells") || !j["cells"].is_array())
        throw ParseError("expected an object with a 'cells' array", 1, "cells");
    std::map<Support, std::uint64_t> cells;
    std::size_t idx = 0;
    for (const auto& c : j["cells"]) {
        ++idx;
        if (!c.is_object() || !c.contains("x") || !c.contains("count") || !c["x"].is_number_integer() ||
            !c["count"].is_number_integer())
            throw ParseError("cell needs integer 'x' and 'count'", idx, "cells");
        insert_cell(cells, c["x"].get<long long>(), c["count"].get<long long>(), idx);
    }
    if (cells.empty()) throw ParseError("dataset has no records", 1, "cells");
    Dataset d{j.value("name", std::string{}), j.value("source", std::string{}), FrequencyTable(cells)};
    return d;
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
    const std::string text = read_file(path);
    Dataset d = format == DatasetFormat::Json ? parse_dataset_json(text) : parse_dataset_csv(text);
    if (d.name.empty()) d.name = path;
    return d;
}

Dataset load_dataset(const std::string& path) {
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return load_dataset(path, json ? DatasetFormat::Json : DatasetFormat::Csv);
}

Dataset drosophila_day177() {
    return Dataset{"drosophila-day177",
                   "Woodruff et al. (1984) chemical mutagenicity experiment, day 177 run: recessive lethal daughters "
                   "per male",
                   FrequencyTable({{0, 23}, {1, 7}, {2, 3}, {91, 1}})};
}

std::optional<Dataset> builtin_dataset(std::string_view name) {
    if (name == "drosophila" || name == "drosophila-day177") return drosophila_day177();
    return std::nullopt;
}

}  // namespace sdiv
