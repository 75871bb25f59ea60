#include "aoisched/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace aoi::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDropTol = 1e-13;   // skip elimination on entries below this
constexpr double kRatioTol = 1e-10;  // pivot eligibility in the ratio test
constexpr double kDriveTol = 1e-7;   // pivot eligibility when expelling artificials

// Dense two-phase tableau simplex over variables with finite or infinite
// bounds. Nonbasic variables rest at one of their bounds; upper bounds are
// handled by bound flips rather than extra rows. Bland's rule (lowest
// eligible index enters, lowest basic index leaves among ties) keeps the
// pivot sequence cycle-free and deterministic.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {
    build();
  }

  LpSolution run() {
    // Phase 1: minimize the artificial sum.
    iterate(d1_.data());
    if (artificial_mass() > opts_.feas_tol) {
      LpSolution sol;
      sol.status = LpStatus::Infeasible;
      sol.pivots = pivots_;
      return sol;
    }
    expel_artificials();

    // Phase 2: original objective, artificials pinned at zero.
    bool bounded = iterate(d2_.data());
    LpSolution sol;
    sol.pivots = pivots_;
    if (!bounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    sol.status = LpStatus::Optimal;
    extract(sol);
    return sol;
  }

 private:
  const LinearProgram& lp_;
  SimplexOptions opts_;

  int n_ = 0;      // structural variables
  int me_ = 0;     // equality rows
  int mu_ = 0;     // inequality rows
  int m_ = 0;      // me_ + mu_
  int art0_ = 0;   // first artificial column
  int ncols_ = 0;

  std::vector<double> tab_;   // m_ x ncols_, row-major
  std::vector<double> beta_;  // current value of the basic variable per row
  std::vector<double> d1_, d2_;
  std::vector<double> lo_, hi_;
  std::vector<int> basis_;
  std::vector<char> is_basic_, at_upper_;
  std::vector<signed char> row_sign_;
  long pivots_ = 0;

  double* row(int i) { return tab_.data() + static_cast<size_t>(i) * ncols_; }

  void build() {
    n_ = lp_.num_vars();
    me_ = static_cast<int>(lp_.eq_rhs.size());
    mu_ = static_cast<int>(lp_.ub_rhs.size());
    m_ = me_ + mu_;

    // Columns: structural, one slack per inequality row, one artificial per
    // row that needs one. Residuals are taken at the all-at-lower point.
    std::vector<double> resid(m_);
    for (int i = 0; i < me_; ++i) {
      resid[i] = lp_.eq_rhs(i) - lp_.eq_matrix.row(i).dot(lp_.lower_bounds);
    }
    for (int i = 0; i < mu_; ++i) {
      resid[me_ + i] = lp_.ub_rhs(i) - lp_.ub_matrix.row(i).dot(lp_.lower_bounds);
    }
    std::vector<int> art_of_row(m_, -1);
    int n_art = 0;
    for (int i = 0; i < m_; ++i) {
      bool needs_art = (i < me_) || resid[i] < 0.0;
      if (needs_art) art_of_row[i] = n_art++;
    }
    art0_ = n_ + mu_;
    ncols_ = art0_ + n_art;

    tab_.assign(static_cast<size_t>(m_) * ncols_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.assign(m_, -1);
    row_sign_.assign(m_, 1);
    lo_.assign(ncols_, 0.0);
    hi_.assign(ncols_, kInf);
    is_basic_.assign(ncols_, 0);
    at_upper_.assign(ncols_, 0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower_bounds(j);
      hi_[j] = lp_.upper_bounds(j);
    }

    for (int i = 0; i < m_; ++i) {
      signed char sign = (resid[i] < 0.0) ? -1 : 1;
      row_sign_[i] = sign;
      double* r = row(i);
      if (i < me_) {
        for (int j = 0; j < n_; ++j) r[j] = sign * lp_.eq_matrix(i, j);
      } else {
        for (int j = 0; j < n_; ++j) r[j] = sign * lp_.ub_matrix(i - me_, j);
        r[n_ + (i - me_)] = sign;  // slack
      }
      double value = sign * resid[i];
      if (art_of_row[i] >= 0) {
        int col = art0_ + art_of_row[i];
        r[col] = 1.0;
        basis_[i] = col;
      } else {
        basis_[i] = n_ + (i - me_);
      }
      beta_[i] = value;
      is_basic_[basis_[i]] = 1;
    }

    // Phase-1 reduced costs: unit cost on artificials minus the rows where
    // an artificial starts basic. Phase-2 costs start as the raw objective.
    d1_.assign(ncols_, 0.0);
    d2_.assign(ncols_, 0.0);
    for (int j = art0_; j < ncols_; ++j) d1_[j] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= art0_) {
        const double* r = row(i);
        for (int j = 0; j < ncols_; ++j) d1_[j] -= r[j];
      }
    }
    for (int j = 0; j < n_; ++j) d2_[j] = lp_.objective(j);
  }

  double artificial_mass() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= art0_) s += beta_[i];
    }
    return s;
  }

  // Runs Bland pivots against the given cost row until no eligible entering
  // column remains. Returns false if an unbounded ray is detected.
  bool iterate(const double* cost) {
    while (true) {
      if (pivots_ >= opts_.max_pivots) {
        throw IterationLimit("simplex exceeded " + std::to_string(opts_.max_pivots) +
                             " pivots");
      }
      int enter = -1;
      int dir = 0;
      for (int j = 0; j < art0_; ++j) {
        if (is_basic_[j] || hi_[j] - lo_[j] <= 0.0) continue;
        if (!at_upper_[j] && cost[j] < -opts_.opt_tol) {
          enter = j;
          dir = 1;
          break;
        }
        if (at_upper_[j] && cost[j] > opts_.opt_tol) {
          enter = j;
          dir = -1;
          break;
        }
      }
      if (enter < 0) return true;

      // Ratio test: t is how far the entering variable moves off its bound.
      double t_flip = hi_[enter] - lo_[enter];
      double best = kInf;
      int leave_row = -1;
      bool leave_hits_upper = false;
      for (int i = 0; i < m_; ++i) {
        double a = dir * row(i)[enter];
        double cap;
        bool hits_upper;
        if (a > kRatioTol) {
          cap = (beta_[i] - lo_[basis_[i]]) / a;
          hits_upper = false;
        } else if (a < -kRatioTol) {
          if (hi_[basis_[i]] == kInf) continue;
          cap = (beta_[i] - hi_[basis_[i]]) / a;
          hits_upper = true;
        } else {
          continue;
        }
        if (cap < 0.0) cap = 0.0;
        if (cap < best - 1e-12 ||
            (cap < best + 1e-12 && (leave_row < 0 || basis_[i] < basis_[leave_row]))) {
          best = cap;
          leave_row = i;
          leave_hits_upper = hits_upper;
        }
      }

      if (t_flip < best) {
        // Bound flip: no basis change, strict objective improvement.
        if (t_flip == kInf) return false;
        for (int i = 0; i < m_; ++i) beta_[i] -= dir * row(i)[enter] * t_flip;
        at_upper_[enter] = !at_upper_[enter];
        ++pivots_;
        continue;
      }
      if (leave_row < 0) return false;  // unbounded ray

      pivot(leave_row, enter, dir, best, leave_hits_upper);
    }
  }

  void pivot(int r, int enter, int dir, double t, bool leave_hits_upper) {
    double enter_value = (dir > 0 ? lo_[enter] : hi_[enter]) + dir * t;
    for (int i = 0; i < m_; ++i) {
      if (i != r) beta_[i] -= dir * row(i)[enter] * t;
    }
    int out = basis_[r];
    is_basic_[out] = 0;
    at_upper_[out] = leave_hits_upper;
    is_basic_[enter] = 1;
    basis_[r] = enter;
    beta_[r] = enter_value;

    double* pr = row(r);
    double piv = pr[enter];
    double inv = 1.0 / piv;
    for (int j = 0; j < ncols_; ++j) pr[j] *= inv;
    pr[enter] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* ri = row(i);
      double f = ri[enter];
      if (std::abs(f) > kDropTol) {
        for (int j = 0; j < ncols_; ++j) ri[j] -= f * pr[j];
      }
      ri[enter] = 0.0;
    }
    eliminate_cost_row(d1_.data(), pr, enter);
    eliminate_cost_row(d2_.data(), pr, enter);
    ++pivots_;
  }

  void eliminate_cost_row(double* d, const double* pr, int enter) {
    double f = d[enter];
    if (std::abs(f) > kDropTol) {
      for (int j = 0; j < ncols_; ++j) d[j] -= f * pr[j];
    }
    d[enter] = 0.0;
  }

  // After phase 1, swap zero-level artificials out of the basis where a
  // usable pivot exists and pin every artificial at zero so phase 2 cannot
  // move them. Rows with no pivot are redundant and keep their artificial.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art0_) continue;
      const double* pr = row(r);
      int col = -1;
      for (int j = 0; j < art0_; ++j) {
        if (!is_basic_[j] && std::abs(pr[j]) > kDriveTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        int dir = at_upper_[col] ? -1 : 1;
        pivot(r, col, dir, 0.0, /*leave_hits_upper=*/false);
      }
    }
    for (int j = art0_; j < ncols_; ++j) {
      lo_[j] = 0.0;
      hi_[j] = 0.0;
    }
  }

  // Rebuilds the basic values by LU-factorizing the basis columns of the
  // original data, clearing the round-off the tableau updates accumulate.
  void extract(LpSolution& sol) const {
    auto original_column = [&](int j, Eigen::VectorXd& col) {
      col.setZero();
      if (j < n_) {
        for (int i = 0; i < me_; ++i) col(i) = row_sign_[i] * lp_.eq_matrix(i, j);
        for (int i = 0; i < mu_; ++i) col(me_ + i) = row_sign_[me_ + i] * lp_.ub_matrix(i, j);
      } else if (j < art0_) {
        int i = me_ + (j - n_);
        col(i) = row_sign_[i];
      } else {
        for (int i = 0; i < m_; ++i) {
          if (basis_[i] == j) col(i) = 1.0;
        }
      }
    };

    Eigen::VectorXd b_eff(m_);
    for (int i = 0; i < me_; ++i) b_eff(i) = row_sign_[i] * lp_.eq_rhs(i);
    for (int i = 0; i < mu_; ++i) b_eff(me_ + i) = row_sign_[me_ + i] * lp_.ub_rhs(i);

    Eigen::VectorXd col(m_);
    for (int j = 0; j < art0_; ++j) {
      if (is_basic_[j]) continue;
      double v = at_upper_[j] ? hi_[j] : lo_[j];
      if (v == 0.0) continue;
      original_column(j, col);
      b_eff -= v * col;
    }

    Eigen::MatrixXd basis_matrix(m_, m_);
    for (int i = 0; i < m_; ++i) {
      original_column(basis_[i], col);
      basis_matrix.col(i) = col;
    }
    Eigen::VectorXd xb = Eigen::PartialPivLU<Eigen::MatrixXd>(basis_matrix).solve(b_eff);

    Eigen::VectorXd z(n_);
    for (int j = 0; j < n_; ++j) z(j) = at_upper_[j] ? hi_[j] : lo_[j];
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) z(basis_[i]) = xb(i);
    }

    sol.values = z;
    sol.objective_value = lp_.objective.dot(z);
    if (me_ > 0) {
      sol.max_eq_residual = (lp_.eq_matrix * z - lp_.eq_rhs).cwiseAbs().maxCoeff();
    }
    double ub_viol = 0.0;
    if (mu_ > 0) {
      ub_viol = (lp_.ub_matrix * z - lp_.ub_rhs).maxCoeff();
    }
    double bound_viol =
        std::max((lp_.lower_bounds - z).maxCoeff(), (z - lp_.upper_bounds).maxCoeff());
    sol.max_ub_violation = std::max(0.0, std::max(ub_viol, bound_viol));
    if (sol.max_eq_residual > 1e-7 || sol.max_ub_violation > 1e-7) {
      throw SingularSystem("simplex basis refactorization left residual " +
                           std::to_string(std::max(sol.max_eq_residual, sol.max_ub_violation)));
    }
  }
};

}  // namespace

void LinearProgram::check() const {
  const int n = num_vars();
  auto fail = [](const std::string& msg) { throw DimensionMismatch(msg); };
  if (eq_matrix.rows() != eq_rhs.size()) fail("eq_matrix rows != eq_rhs size");
  if (ub_matrix.rows() != ub_rhs.size()) fail("ub_matrix rows != ub_rhs size");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) fail("eq_matrix cols != objective size");
  if (ub_matrix.rows() > 0 && ub_matrix.cols() != n) fail("ub_matrix cols != objective size");
  if (lower_bounds.size() != n || upper_bounds.size() != n) fail("bounds size != objective size");
  if (!objective.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite() ||
      !ub_matrix.allFinite() || !ub_rhs.allFinite()) {
    fail("non-finite coefficient");
  }
  for (int j = 0; j < n; ++j) {
    double lo = lower_bounds(j), hi = upper_bounds(j);
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
      fail("variable " + std::to_string(j) + " bounds outside 0 <= lo <= hi <= 1");
    }
  }
}

LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.check();
  Simplex simplex(lp, opts);
  return simplex.run();
}

}  // namespace aoi::lp
