#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sdiv/frequency_table.hpp"

namespace sdiv {

enum class DatasetFormat { Csv, Json };

struct Dataset {
    std::string name;
    std::string source;
    FrequencyTable table;
};

/// CSV with header "x,count"; one record per line.
Dataset parse_dataset_csv(std::string_view text);

/// {"name": str, "source": str?, "cells": [{"x": int, "count": int}, ...]}
Dataset parse_dataset_json(std::string_view text);

Dataset load_dataset(const std::string& path, DatasetFormat format);

/// Format from the file extension (.json, anything else is CSV).
Dataset load_dataset(const std::string& path);

/// Embedded fixtures by name; "drosophila" and "drosophila-day177" are the
/// same table (x = 0, 1, 2, 91 with counts 23, 7, 3, 1).
std::optional<Dataset> builtin_dataset(std::string_view name);

Dataset drosophila_day177();

}  // namespace sdiv
