#include "critreg/sparse.hpp"

#include "critreg/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace critreg {

SparseOperator::SparseOperator(std::size_t n, std::vector<Entry> entries) : n_(n) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.row < b.row || (a.row == b.row && a.col < b.col); });
    row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        const auto& e = entries[k];
        if (e.row >= n || e.col >= n) throw InvalidInput("sparse entry out of range");
        double v = 0.0;
        std::size_t k2 = k;
        for (; k2 < entries.size() && entries[k2].row == e.row && entries[k2].col == e.col; ++k2) v += entries[k2].value;
        cols_.push_back(e.col);
        values_.push_back(v);
        ++row_ptr_[e.row + 1];
        k = k2;
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (at(cols_[k], i) != values_[k]) throw InvalidInput("sparse operator is not symmetric");
}

void SparseOperator::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * in[cols_[k]];
        out[i] = s;
    }
}

std::vector<double> SparseOperator::apply(std::span<const double> in) const {
    std::vector<double> out(n_);
    apply(in, out);
    return out;
}

double SparseOperator::quadratic_form(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double r = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) r += values_[k] * x[cols_[k]];
        s += x[i] * r;
    }
    return s;
}

double SparseOperator::diagonal(std::size_t i) const { return at(i, i); }

double SparseOperator::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k];
    return s;
}

double SparseOperator::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(values_[k]);
        best = std::max(best, s);
    }
    return best;
}

double SparseOperator::at(std::size_t i, std::size_t j) const {
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

} // namespace critreg
