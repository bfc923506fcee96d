#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace critreg {

/// Symmetric sparse matrix in compressed-row form. Immutable once built.
class SparseOperator {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseOperator() = default;
    /// Entries may come in any order; duplicates are summed. Throws if the pattern is not symmetric.
    SparseOperator(std::size_t n, std::vector<Entry> entries);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }

    /// out = A * in
    void apply(std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] std::vector<double> apply(std::span<const double> in) const;

    [[nodiscard]] double quadratic_form(std::span<const double> x) const;
    [[nodiscard]] double diagonal(std::size_t i) const;
    [[nodiscard]] double row_sum(std::size_t i) const;
    [[nodiscard]] double norm_inf() const;
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;

    [[nodiscard]] std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    [[nodiscard]] std::span<const std::size_t> cols() const { return cols_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

} // namespace critreg
