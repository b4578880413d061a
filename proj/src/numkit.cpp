#include "gcsync/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gcsync {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::Singular: return "Singular";
    case Errc::Overflow: return "Overflow";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidEdge: return "InvalidEdge";
    case Errc::InvalidTopology: return "InvalidTopology";
    case Errc::WrongKind: return "WrongKind";
    case Errc::NotAdmissible: return "NotAdmissible";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::IllPosed: return "IllPosed";
    case Errc::NoFeasibleStart: return "NoFeasibleStart";
    case Errc::Step1Infeasible: return "Step1Infeasible";
    case Errc::BadSpectrum: return "BadSpectrum";
    case Errc::AgreementInitialStates: return "AgreementInitialStates";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::Infeasible: return "Infeasible";
    case Errc::NotConverged: return "NotConverged";
    case Errc::NumericalBlowup: return "NumericalBlowup";
    case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

namespace {

std::string dims(const Mat& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(Errc::ShapeMismatch, std::string(op) + " " + dims(a) + " vs " + dims(b));
}

} // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
        throw Error(Errc::ShapeMismatch, "entry count does not match dimensions");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw Error(Errc::ShapeMismatch, "ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(std::span<const double> d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Mat Mat::column(std::span<const double> v) {
    return Mat(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw Error(Errc::ShapeMismatch, "block out of range");
    Mat b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
        throw Error(Errc::ShapeMismatch, "set_block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Mat::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double Mat::norm_fro() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Mat::norm_1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool Mat::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat Mat::sym() const {
    if (!square()) throw Error(Errc::ShapeMismatch, "sym of non-square " + dims(*this));
    Mat s(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
}

Mat& Mat::operator+=(const Mat& o) {
    require_same_shape(*this, o, "+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    require_same_shape(*this, o, "-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator-(Mat a) { return a *= -1.0; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw Error(Errc::ShapeMismatch, "product " + dims(a) + " * " + dims(b));
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec operator*(const Mat& a, std::span<const double> v) {
    if (a.cols() != v.size()) throw Error(Errc::ShapeMismatch, "matvec " + dims(a));
    Vec out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Vec mul_transpose(const Mat& a, std::span<const double> v) {
    if (a.rows() != v.size()) throw Error(Errc::ShapeMismatch, "matvec transpose " + dims(a));
    Vec out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * v[i];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(Errc::ShapeMismatch, "dot length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double quad_form(const Mat& s, std::span<const double> v) { return dot(v, s * v); }

Mat kron(const Mat& a, const Mat& b) {
    Mat k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

bool is_symmetric(const Mat& s, double rel_tol) {
    if (!s.square()) return false;
    const double scale = std::max(1.0, s.max_abs());
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > rel_tol * scale) return false;
    return true;
}

SymEig sym_eig(const Mat& s, const NumTolerances& tol) {
    if (!s.square()) throw Error(Errc::ShapeMismatch, "sym_eig of " + dims(s));
    if (!s.all_finite()) throw Error(Errc::Overflow, "sym_eig input has non-finite entries");
    if (!is_symmetric(s, tol.symmetry)) throw Error(Errc::NotSymmetric, "sym_eig input");

    const std::size_t n = s.rows();
    Mat a = s.sym();
    Mat v = Mat::identity(n);
    const double target = tol.jacobi * std::max(a.norm_fro(), std::numeric_limits<double>::min());

    auto off_mass = [&] {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(off);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_mass() > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymEig out{Vec(n), Mat(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

DefinitenessReport is_pd(const Mat& s, double margin, const NumTolerances& tol) {
    if (s.empty()) return {true, std::numeric_limits<double>::infinity()};
    const auto eig = sym_eig(s, tol);
    return {eig.values.front() > margin, eig.values.front()};
}

namespace {

struct Lu {
    Mat lu;
    std::vector<std::size_t> perm;
};

Lu lu_factor(const Mat& a) {
    const std::size_t n = a.rows();
    Lu f{a, std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), 0);
    const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f.lu(i, k)) > std::abs(f.lu(piv, k))) piv = i;
        if (std::abs(f.lu(piv, k)) <= 1e-14 * scale) throw Error(Errc::Singular, "pivot collapse in LU");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = f.lu(i, k) / f.lu(k, k);
            f.lu(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}

Mat lu_solve(const Lu& f, const Mat& b) {
    const std::size_t n = f.lu.rows();
    Mat x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(f.perm[i], c);
            for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
            y[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x(j, c);
            x(ii, c) = s / f.lu(ii, ii);
        }
    }
    return x;
}

} // namespace

Mat solve(const Mat& a, const Mat& b, const NumTolerances& tol) {
    if (!a.square() || a.rows() != b.rows())
        throw Error(Errc::ShapeMismatch, "solve " + dims(a) + " with rhs " + dims(b));
    const auto f = lu_factor(a);
    const Mat inv = lu_solve(f, Mat::identity(a.rows()));
    const double cond = a.norm_1() * inv.norm_1();
    if (!std::isfinite(cond) || cond > tol.condition)
        throw Error(Errc::Singular, "condition estimate exceeds bound");
    return lu_solve(f, b);
}

Mat inverse(const Mat& a, const NumTolerances& tol) { return solve(a, Mat::identity(a.rows()), tol); }

Mat expm(const Mat& a, double t, const NumTolerances& tol) {
    if (!a.square()) throw Error(Errc::ShapeMismatch, "expm of " + dims(a));
    const std::size_t n = a.rows();
    Mat x = a * t;
    if (!x.all_finite()) throw Error(Errc::Overflow, "expm argument not finite");

    const double norm = x.norm_1();
    int squarings = 0;
    if (norm > tol.expm_scaled_norm)
        squarings = static_cast<int>(std::ceil(std::log2(norm / tol.expm_scaled_norm)));
    if (squarings > 1000) throw Error(Errc::Overflow, "expm scaling count out of range");
    x *= std::ldexp(1.0, -squarings);

    // Padé(6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
    constexpr double c[] = {1.0,
                            1.0 / 2.0,
                            5.0 / 44.0,
                            1.0 / 66.0,
                            1.0 / 792.0,
                            1.0 / 15840.0,
                            1.0 / 665280.0};
    const Mat id = Mat::identity(n);
    Mat power = id;
    Mat num = id * c[0];
    Mat den = id * c[0];
    for (int k = 1; k <= 6; ++k) {
        power = power * x;
        num += power * c[k];
        den += power * ((k % 2 == 0) ? c[k] : -c[k]);
    }
    Mat r = lu_solve(lu_factor(den), num);
    for (int s = 0; s < squarings; ++s) {
        r = r * r;
        if (!r.all_finite()) throw Error(Errc::Overflow, "expm result exceeds representable range");
    }
    if (!r.all_finite()) throw Error(Errc::Overflow, "expm result exceeds representable range");
    return r;
}

} // namespace gcsync
