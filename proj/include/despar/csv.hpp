#pragma once

#include "despar/dataset.hpp"
#include "despar/inference.hpp"

#include <istream>
#include <span>
#include <string>
#include <vector>

namespace despar {

/// Comma-separated, '.' decimals, header row required. First column is the
/// response, the rest are regressors. Throws ParseError naming line and column.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

/// Restriction file: header of target column names followed by `q`, one row
/// per hypothesis. Columns are mapped onto `targets` (names of the columns in
/// H, in H order); names outside `targets` raise UnknownColumn.
Restriction read_restriction_csv(std::istream& in, std::span<const std::string> targets,
                                 std::span<const Index> H);
Restriction read_restriction_csv(const std::string& path, std::span<const std::string> targets,
                                 std::span<const Index> H);

}  // namespace despar
