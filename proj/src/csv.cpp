#include "rpcls/csv.hpp"

#include "rpcls/rng.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

namespace rpcls {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

Matrix read_csv_matrix(std::istream& in, const std::string& source_name) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view content = trim(line);
        if (content.empty()) continue;
        std::size_t fields = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = content.find(',', pos);
            const std::string_view field =
                trim(content.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
                throw InvalidArgument(source_name + ":" + std::to_string(line_no) + ": field " +
                                      std::to_string(fields + 1) + " is not numeric ('" +
                                      std::string(field) + "')");
            }
            values.push_back(v);
            ++fields;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw InvalidArgument(source_name + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(cols) + " fields, found " + std::to_string(fields));
        }
        ++rows;
    }
    if (rows == 0) throw InvalidArgument(source_name + ": no data rows");
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
        }
    }
    return out;
}

Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return read_csv_matrix(in, path);
}

void write_csv_matrix(std::ostream& out, const Matrix& data) {
    const auto old_precision = out.precision(17);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (j > 0) out << ',';
            out << data(i, j);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

LSProblem load_csv(const std::string& path, const std::optional<std::string>& b_path) {
    Matrix data = read_csv_matrix(path);
    if (!b_path) {
        if (data.cols() < 2) throw InvalidArgument(path + ": need at least two columns (A and b)");
        const Eigen::Index n = data.cols() - 1;
        if (n >= data.rows()) {
            throw DimensionError(path + ": need more rows than columns of A (" + std::to_string(data.rows()) +
                                 " rows, " + std::to_string(n) + " columns)");
        }
        Vector b = data.col(n);
        Matrix A = data.leftCols(n);
        return LSProblem(std::move(A), std::move(b));
    }
    const Matrix bm = read_csv_matrix(*b_path);
    if (bm.cols() != 1) throw InvalidArgument(*b_path + ": b file must have exactly one column");
    if (bm.rows() != data.rows()) {
        throw DimensionError(*b_path + ": b has " + std::to_string(bm.rows()) + " rows, A has " +
                             std::to_string(data.rows()));
    }
    if (data.cols() >= data.rows()) throw DimensionError(path + ": need more rows than columns");
    return LSProblem(std::move(data), bm.col(0));
}

void write_problem_csv(std::ostream& out, const LSProblem& problem) {
    Matrix data(problem.rows(), problem.cols() + 1);
    data << problem.A(), problem.b();
    write_csv_matrix(out, data);
}

RowSplit sample_row_split(Eigen::Index total_rows, Eigen::Index n_train, Eigen::Index n_test,
                          std::uint64_t seed) {
    if (n_train < 0 || n_test < 0 || n_train + n_test > total_rows) {
        throw InvalidArgument("sample_row_split: requested " + std::to_string(n_train) + " + " +
                              std::to_string(n_test) + " rows from " + std::to_string(total_rows));
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(total_rows));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    CounterRng rng(derive_key(seed, 0x5b117));
    const Eigen::Index k = n_train + n_test;
    for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, total_rows - 1);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    RowSplit split;
    split.train.assign(perm.begin(), perm.begin() + n_train);
    split.test.assign(perm.begin() + n_train, perm.begin() + k);
    return split;
}

LSProblem take_rows(const LSProblem& problem, const std::vector<Eigen::Index>& rows) {
    Matrix A(static_cast<Eigen::Index>(rows.size()), problem.cols());
    Vector b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        if (r < 0 || r >= problem.rows()) throw InvalidArgument("take_rows: row index out of range");
        A.row(static_cast<Eigen::Index>(i)) = problem.A().row(r);
        b(static_cast<Eigen::Index>(i)) = problem.b()(r);
    }
    return LSProblem(std::move(A), std::move(b));
}

}  // namespace rpcls
