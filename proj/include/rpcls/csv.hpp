#pragma once

#include "rpcls/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rpcls {

/// Header-less comma-separated numeric matrix, one row per line. Blank lines are
/// skipped. Throws InvalidArgument naming the offending line on ragged rows or
/// non-numeric fields, and on empty input.
Matrix read_csv_matrix(std::istream& in, const std::string& source_name = "<stream>");
Matrix read_csv_matrix(const std::string& path);

void write_csv_matrix(std::ostream& out, const Matrix& data);

/// Loads a least-squares problem. Without `b_path` the last column of `path` is b;
/// otherwise `path` holds A and `b_path` a single column.
LSProblem load_csv(const std::string& path, const std::optional<std::string>& b_path = std::nullopt);

/// Writes [A b] with b as the last column.
void write_problem_csv(std::ostream& out, const LSProblem& problem);

struct RowSplit {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

/// Disjoint uniform samples (without replacement) of n_train and n_test row indices.
RowSplit sample_row_split(Eigen::Index total_rows, Eigen::Index n_train, Eigen::Index n_test,
                          std::uint64_t seed);

/// Sub-problem made of the selected rows.
LSProblem take_rows(const LSProblem& problem, const std::vector<Eigen::Index>& rows);

}  // namespace rpcls
