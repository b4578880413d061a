#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "gcsync/error.hpp"

namespace gcsync {

using Vec = std::vector<double>;

/// Dense row-major real matrix. Small sizes only (tens of rows).
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
    static Mat diag(std::span<const double> d);
    static Mat column(std::span<const double> v);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> entries() const noexcept { return data_; }
    [[nodiscard]] std::span<double> entries() noexcept { return data_; }

    [[nodiscard]] Mat transpose() const;
    [[nodiscard]] Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Mat& b);

    [[nodiscard]] double trace() const;
    [[nodiscard]] double norm_fro() const;
    [[nodiscard]] double norm_1() const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool all_finite() const;

    /// (M + Mᵀ)/2
    [[nodiscard]] Mat sym() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator-(Mat a);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);
Vec operator*(const Mat& a, std::span<const double> v);

/// Returns aᵀ·v without forming the transpose.
Vec mul_transpose(const Mat& a, std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
/// vᵀ·S·v
double quad_form(const Mat& s, std::span<const double> v);

/// Kronecker product; block (i,j) of the result is a(i,j)·b.
Mat kron(const Mat& a, const Mat& b);

/// Tolerances used by the kernel. Defaults match the module contract.
struct NumTolerances {
    double symmetry = 1e-10;      // relative asymmetry allowed by sym_eig / is_pd
    double jacobi = 1e-12;        // off-diagonal Frobenius mass, relative
    double condition = 1e12;      // solve() refuses matrices beyond this 1-norm condition estimate
    double expm_scaled_norm = 0.5;
};

struct SymEig {
    Vec values;  // ascending
    Mat vectors; // orthonormal columns, vectors.col(k) pairs with values[k]
};

bool is_symmetric(const Mat& s, double rel_tol = NumTolerances{}.symmetry);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
SymEig sym_eig(const Mat& s, const NumTolerances& tol = {});

struct DefinitenessReport {
    bool holds = false;
    double min_eigenvalue = 0.0;
};

/// True iff the smallest eigenvalue of s exceeds margin.
DefinitenessReport is_pd(const Mat& s, double margin, const NumTolerances& tol = {});

/// Solves a·x = b by LU with partial pivoting.
Mat solve(const Mat& a, const Mat& b, const NumTolerances& tol = {});
Mat inverse(const Mat& a, const NumTolerances& tol = {});

/// e^{a·t} by scaling and squaring with a degree-6 diagonal Padé approximant.
Mat expm(const Mat& a, double t, const NumTolerances& tol = {});

} // namespace gcsync
