#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace weakres::milp {

/// min cost^T x  s.t.  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
/// A is stored by sparse columns; bounds may be infinite.
template <class Scalar> struct LpModel {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::pair<int, Scalar>>> columns;
    Vector row_lo;
    Vector row_hi;
    Vector cost;
};

enum class VarStatus : signed char { Basic, AtLower, AtUpper, Zero };

/// Basis over the structural columns followed by one logical per row.
struct LpBasis {
    std::vector<int> head;
    std::vector<VarStatus> status;
    bool empty() const { return head.empty(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Singular };

template <class Scalar> struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x; // structurals then row activities
    Scalar objective = 0;
    LpBasis basis;
    long iterations = 0;
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_every = 100;
    long max_iterations = 100000;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int bland_after = 50;
};

/// Bounded primal simplex on the computational form [A | -I] z = 0 with an
/// explicit dense basis inverse. Phase 1 minimises the sum of
/// infeasibilities with a short-step ratio test, so any starting basis works.
template <class Scalar> class DenseSimplex {
  public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    DenseSimplex(const LpModel<Scalar>& model, SimplexOptions opt = {})
        : model_(model), opt_(opt), m_(model.rows), n_(model.cols) {}

    LpResult<Scalar> solve(const Vector& col_lo, const Vector& col_hi, const LpBasis* warm = nullptr);

  private:
    void set_bounds(const Vector& col_lo, const Vector& col_hi);
    void slack_basis();
    bool load_basis(const LpBasis& b);
    bool refactor();
    void compute_basics();
    Scalar residual() const;
    void place_nonbasic(int j);
    void column(int j, Vector& out) const;
    Scalar dot_column(int j, const Vector& y) const;
    bool primal_infeasible(int j) const {
        return x_(j) < lo_(j) - opt_.feas_tol || x_(j) > hi_(j) + opt_.feas_tol;
    }

    const LpModel<Scalar>& model_;
    SimplexOptions opt_;
    int m_;
    int n_;
    Vector lo_, hi_, x_;
    std::vector<int> head_;
    std::vector<VarStatus> status_;
    Matrix binv_;
    bool factored_ = false;
    long updates_ = 0; // product-form updates since the last refactor
};

template <class Scalar>
void DenseSimplex<Scalar>::set_bounds(const Vector& col_lo, const Vector& col_hi) {
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    lo_.head(n_) = col_lo;
    hi_.head(n_) = col_hi;
    lo_.tail(m_) = model_.row_lo;
    hi_.tail(m_) = model_.row_hi;
    x_ = Vector::Zero(n_ + m_);
}

template <class Scalar> void DenseSimplex<Scalar>::place_nonbasic(int j) {
    constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
    VarStatus& s = status_[static_cast<std::size_t>(j)];
    if (s == VarStatus::AtLower && lo_(j) == -inf)
        s = hi_(j) < inf ? VarStatus::AtUpper : VarStatus::Zero;
    else if (s == VarStatus::AtUpper && hi_(j) == inf)
        s = lo_(j) > -inf ? VarStatus::AtLower : VarStatus::Zero;
    else if (s == VarStatus::Zero && (lo_(j) > -inf || hi_(j) < inf))
        s = lo_(j) > -inf ? VarStatus::AtLower : VarStatus::AtUpper;
    x_(j) = s == VarStatus::AtLower ? lo_(j) : s == VarStatus::AtUpper ? hi_(j) : Scalar(0);
}

template <class Scalar> void DenseSimplex<Scalar>::slack_basis() {
    head_.resize(static_cast<std::size_t>(m_));
    status_.assign(static_cast<std::size_t>(n_ + m_), VarStatus::AtLower);
    for (int i = 0; i < m_; ++i) {
        head_[static_cast<std::size_t>(i)] = n_ + i;
        status_[static_cast<std::size_t>(n_ + i)] = VarStatus::Basic;
    }
    for (int j = 0; j < n_; ++j)
        place_nonbasic(j);
    binv_ = -Matrix::Identity(m_, m_);
    factored_ = true;
    updates_ = 0;
}

template <class Scalar> bool DenseSimplex<Scalar>::load_basis(const LpBasis& b) {
    if (static_cast<int>(b.head.size()) != m_ || static_cast<int>(b.status.size()) != n_ + m_)
        return false;
    // The current inverse is reusable when the basis is unchanged.
    bool same = factored_ && head_ == b.head;
    head_ = b.head;
    status_ = b.status;
    for (int j = 0; j < n_ + m_; ++j)
        if (status_[static_cast<std::size_t>(j)] != VarStatus::Basic)
            place_nonbasic(j);
    return same || refactor();
}

template <class Scalar> void DenseSimplex<Scalar>::column(int j, Vector& out) const {
    out.setZero(m_);
    if (j < n_) {
        for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(j)])
            out(i) = a;
    } else {
        out(j - n_) = Scalar(-1);
    }
}

template <class Scalar> Scalar DenseSimplex<Scalar>::dot_column(int j, const Vector& y) const {
    if (j >= n_)
        return -y(j - n_);
    Scalar s = 0;
    for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(j)])
        s += a * y(i);
    return s;
}

template <class Scalar> bool DenseSimplex<Scalar>::refactor() {
    factored_ = false;
    updates_ = 0;
    if (m_ == 0) {
        binv_.resize(0, 0);
        return true;
    }
    // Logical columns are -e_r, so only the block of structural columns on
    // the rows not covered by a basic logical needs factorising.
    std::vector<int> spos, lpos, free_rows;
    std::vector<char> covered(static_cast<std::size_t>(m_), 0);
    for (int i = 0; i < m_; ++i) {
        int j = head_[static_cast<std::size_t>(i)];
        if (j >= n_) {
            lpos.push_back(i);
            covered[static_cast<std::size_t>(j - n_)] = 1;
        } else {
            spos.push_back(i);
        }
    }
    std::vector<int> where(static_cast<std::size_t>(m_), -1);
    for (int r = 0; r < m_; ++r)
        if (!covered[static_cast<std::size_t>(r)]) {
            where[static_cast<std::size_t>(r)] = static_cast<int>(free_rows.size());
            free_rows.push_back(r);
        }
    int k = static_cast<int>(spos.size());
    if (static_cast<int>(free_rows.size()) != k)
        return false;
    binv_.setZero(m_, m_);
    Matrix a1 = Matrix::Zero(k, k);
    for (int c = 0; c < k; ++c)
        for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(head_[static_cast<std::size_t>(spos[static_cast<std::size_t>(c)])])])
            if (where[static_cast<std::size_t>(i)] >= 0)
                a1(where[static_cast<std::size_t>(i)], c) = a;
    Matrix inv;
    if (k > 0) {
        Eigen::PartialPivLU<Matrix> lu(a1);
        auto diag = lu.matrixLU().diagonal().cwiseAbs();
        Scalar big = std::max(diag.maxCoeff(), Scalar(1));
        if (!(diag.minCoeff() > Scalar(1e-11) * big))
            return false;
        inv = lu.inverse();
    }
    for (int c = 0; c < k; ++c)
        for (int f = 0; f < k; ++f)
            binv_(spos[static_cast<std::size_t>(c)], free_rows[static_cast<std::size_t>(f)]) = inv(c, f);
    // Logical on row r: x_r = (A_r,S x_S) - b_r.
    std::vector<int> logical_at(static_cast<std::size_t>(m_), -1);
    for (int i : lpos)
        logical_at[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)] - n_)] = i;
    for (int i : lpos)
        binv_(i, head_[static_cast<std::size_t>(i)] - n_) = Scalar(-1);
    for (int c = 0; c < k; ++c)
        for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(head_[static_cast<std::size_t>(spos[static_cast<std::size_t>(c)])])]) {
            int pos = logical_at[static_cast<std::size_t>(i)];
            if (pos < 0)
                continue;
            for (int f = 0; f < k; ++f)
                binv_(pos, free_rows[static_cast<std::size_t>(f)]) += a * inv(c, f);
        }
    factored_ = true;
    return true;
}

// Largest violation of [A | -I] x = 0, scaled by the row activity.
template <class Scalar> Scalar DenseSimplex<Scalar>::residual() const {
    Vector r = -x_.tail(m_);
    for (int j = 0; j < n_; ++j)
        for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(j)])
            r(i) += a * x_(j);
    Scalar worst = 0;
    for (int i = 0; i < m_; ++i)
        worst = std::max(worst, std::abs(r(i)) / (Scalar(1) + std::abs(x_(n_ + i))));
    return worst;
}

template <class Scalar> void DenseSimplex<Scalar>::compute_basics() {
    Vector r = Vector::Zero(m_);
    for (int j = 0; j < n_ + m_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic || x_(j) == Scalar(0))
            continue;
        if (j < n_)
            for (const auto& [i, a] : model_.columns[static_cast<std::size_t>(j)])
                r(i) += a * x_(j);
        else
            r(j - n_) -= x_(j);
    }
    Vector xb = -(binv_ * r);
    for (int i = 0; i < m_; ++i)
        x_(head_[static_cast<std::size_t>(i)]) = xb(i);
}

template <class Scalar>
LpResult<Scalar> DenseSimplex<Scalar>::solve(const Vector& col_lo, const Vector& col_hi,
                                             const LpBasis* warm) {
    constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
    LpResult<Scalar> res;
    set_bounds(col_lo, col_hi);
    for (int j = 0; j < n_ + m_; ++j)
        if (lo_(j) > hi_(j) + opt_.feas_tol) {
            res.status = LpStatus::Infeasible;
            return res;
        }
    if (!warm || !load_basis(*warm))
        slack_basis();
    compute_basics();

    const Scalar ftol = opt_.feas_tol;
    const Scalar dtol = opt_.opt_tol;
    Vector cb(m_), y(m_), alpha(m_), col(m_), row(m_);
    long iter = 0;
    int degenerate = 0;
    int cleanups = 0;

    for (;;) {
        if (iter >= opt_.max_iterations) {
            res.status = LpStatus::IterationLimit;
            break;
        }
        if (updates_ >= opt_.refactor_every) {
            if (!refactor()) {
                res.status = LpStatus::Singular;
                break;
            }
            compute_basics();
            updates_ = 0;
        }

        bool phase1 = false;
        for (int i = 0; i < m_; ++i) {
            int j = head_[static_cast<std::size_t>(i)];
            if (x_(j) < lo_(j) - ftol) {
                cb(i) = -1;
                phase1 = true;
            } else if (x_(j) > hi_(j) + ftol) {
                cb(i) = 1;
                phase1 = true;
            } else {
                cb(i) = 0;
            }
        }
        if (!phase1)
            for (int i = 0; i < m_; ++i) {
                int j = head_[static_cast<std::size_t>(i)];
                cb(i) = j < n_ ? model_.cost(j) : Scalar(0);
            }
        y.noalias() = binv_.transpose() * cb;

        // Pricing: Dantzig, or Bland while stalling.
        bool bland = degenerate > opt_.bland_after;
        int q = -1;
        int dir = 0;
        Scalar best = 0;
        for (int j = 0; j < n_ + m_; ++j) {
            VarStatus s = status_[static_cast<std::size_t>(j)];
            if (s == VarStatus::Basic || lo_(j) == hi_(j))
                continue;
            Scalar cj = (!phase1 && j < n_) ? model_.cost(j) : Scalar(0);
            Scalar d = cj - dot_column(j, y);
            int dj = 0;
            if ((s == VarStatus::AtLower || s == VarStatus::Zero) && d < -dtol)
                dj = 1;
            else if ((s == VarStatus::AtUpper || s == VarStatus::Zero) && d > dtol)
                dj = -1;
            if (!dj)
                continue;
            if (bland) {
                q = j;
                dir = dj;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                q = j;
                dir = dj;
            }
        }

        if (q < 0) {
            // Optimal for the current phase. Clean up drift once before accepting.
            if (cleanups < 2 && updates_ > 0 && residual() > Scalar(1e-10)) {
                ++cleanups;
                if (!refactor()) {
                    res.status = LpStatus::Singular;
                    break;
                }
                compute_basics();
                updates_ = 0;
                continue;
            }
            res.status = phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
            break;
        }

        column(q, col);
        alpha.noalias() = binv_ * col;

        // Harris two-pass ratio test on delta_i = -alpha_i * dir.
        auto limits = [&](int i, Scalar& lower, Scalar& upper) {
            int j = head_[static_cast<std::size_t>(i)];
            lower = lo_(j);
            upper = hi_(j);
            if (phase1) {
                if (x_(j) < lo_(j) - ftol) {
                    lower = -inf;
                    upper = lo_(j);
                } else if (x_(j) > hi_(j) + ftol) {
                    lower = hi_(j);
                    upper = inf;
                }
            }
        };
        Scalar theta_max = inf;
        for (int i = 0; i < m_; ++i) {
            Scalar delta = -alpha(i) * dir;
            if (std::abs(delta) < opt_.pivot_tol)
                continue;
            Scalar lower, upper;
            limits(i, lower, upper);
            int j = head_[static_cast<std::size_t>(i)];
            if (delta < 0 && lower > -inf)
                theta_max = std::min(theta_max, (x_(j) - lower + ftol) / -delta);
            else if (delta > 0 && upper < inf)
                theta_max = std::min(theta_max, (upper - x_(j) + ftol) / delta);
        }
        Scalar flip = (lo_(q) > -inf && hi_(q) < inf) ? hi_(q) - lo_(q) : inf;

        int r = -1;
        Scalar step = 0;
        Scalar leave_value = 0;
        bool leave_upper = false;
        if (theta_max < inf) {
            Scalar piv = 0;
            for (int i = 0; i < m_; ++i) {
                Scalar delta = -alpha(i) * dir;
                if (std::abs(delta) < opt_.pivot_tol)
                    continue;
                Scalar lower, upper;
                limits(i, lower, upper);
                int j = head_[static_cast<std::size_t>(i)];
                Scalar ratio, bound;
                if (delta < 0 && lower > -inf) {
                    ratio = (x_(j) - lower) / -delta;
                    bound = lower;
                } else if (delta > 0 && upper < inf) {
                    ratio = (upper - x_(j)) / delta;
                    bound = upper;
                } else {
                    continue;
                }
                if (ratio <= theta_max && std::abs(alpha(i)) > piv) {
                    piv = std::abs(alpha(i));
                    r = i;
                    step = std::max(ratio, Scalar(0));
                    leave_value = bound;
                    leave_upper = bound == hi_(j) && !(bound == lo_(j));
                }
            }
        }

        if (r < 0 && flip == inf) {
            res.status = phase1 ? LpStatus::Singular : LpStatus::Unbounded;
            break;
        }
        ++iter;
        ++updates_;

        if (r < 0 || flip <= step) {
            // Entering variable reaches its opposite bound first.
            for (int i = 0; i < m_; ++i)
                x_(head_[static_cast<std::size_t>(i)]) -= alpha(i) * dir * flip;
            x_(q) += dir * flip;
            status_[static_cast<std::size_t>(q)] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
            degenerate = 0;
            continue;
        }

        for (int i = 0; i < m_; ++i)
            x_(head_[static_cast<std::size_t>(i)]) -= alpha(i) * dir * step;
        x_(q) += dir * step;
        int leaving = head_[static_cast<std::size_t>(r)];
        x_(leaving) = leave_value;
        status_[static_cast<std::size_t>(leaving)] = leave_upper ? VarStatus::AtUpper : VarStatus::AtLower;
        status_[static_cast<std::size_t>(q)] = VarStatus::Basic;
        head_[static_cast<std::size_t>(r)] = q;
        degenerate = step < Scalar(1e-12) ? degenerate + 1 : 0;

        Scalar p = alpha(r);
        row = binv_.row(r).transpose() / p;
        alpha(r) = 0;
        binv_.noalias() -= alpha * row.transpose();
        binv_.row(r) = row.transpose();
    }

    res.iterations = iter;
    res.x = x_;
    res.objective = model_.cost.dot(x_.head(n_));
    res.basis.head = head_;
    res.basis.status = status_;
    return res;
}

} // namespace weakres::milp
