#include "lrca/optimize.hpp"

#include "lrca/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace lrca {

Bounds::Bounds(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw Error(ErrorKind::DimensionMismatch, "bounds dimensions");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw Error(ErrorKind::DimensionMismatch, "lower bound exceeds upper bound");
    }
  }
}

Bounds Bounds::unbounded(Eigen::Index dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return Bounds(Vector::Constant(dim, -inf), Vector::Constant(dim, inf));
}

bool Bounds::contains(const Vector& x) const {
  return x.size() == dim() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Vector Bounds::project(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_value(const Objective& f, const Vector& x) {
  const double v = f.value(x);
  return std::isfinite(v) ? v : kNegInf;
}

Vector gradient_of(const Objective& f, const Vector& x) {
  if (f.gradient) return f.gradient(x);
  return fd_gradient(f.value, x);
}

double projected_gradient_norm(const Vector& x, const Vector& g, const Bounds& b) {
  return (b.project(x + g) - x).cwiseAbs().maxCoeff();
}

std::vector<Eigen::Index> active_indices(const Vector& x, const Bounds& b, double tol) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - b.lower[i]) <= tol || std::abs(x[i] - b.upper[i]) <= tol) out.push_back(i);
  }
  return out;
}

/// Solves C_ff d_f = g_f on the free set; nullopt if C_ff is not positive definite.
std::optional<Vector> free_direction(const Matrix& c, const Vector& g,
                                     const std::vector<Eigen::Index>& free) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  Matrix cf(nf, nf);
  Vector gf(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    gf[a] = g[free[a]];
    for (Eigen::Index b = 0; b < nf; ++b) cf(a, b) = c(free[a], free[b]);
  }
  if (!cf.allFinite()) return std::nullopt;
  try {
    Vector df = Cholesky(SymMatrix(0.5 * (cf + cf.transpose()))).solve(gf);
    Vector d = Vector::Zero(g.size());
    for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];
    return d;
  } catch (const Error&) {
    return std::nullopt;
  }
}

FitResult ascend(const Objective& f, const Vector& start, const Bounds& bounds,
                 const OptimizeOptions& opt) {
  const Eigen::Index d = start.size();
  Vector x = start;
  double fx = f.value(x);
  if (!std::isfinite(fx)) throw Error(ErrorKind::NonFiniteEvaluation, "objective not finite at start");
  Vector g = gradient_of(f, x);
  if (!g.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "gradient not finite at start");

  Matrix bfgs = Matrix::Identity(d, d);
  bool bfgs_scaled = false;
  FitResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double pg = projected_gradient_norm(x, g, bounds);
    if (pg <= opt.tolerance * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool at_lower = x[i] <= bounds.lower[i] + opt.active_tolerance && g[i] < 0.0;
      const bool at_upper = x[i] >= bounds.upper[i] - opt.active_tolerance && g[i] > 0.0;
      if (!at_lower && !at_upper) free.push_back(i);
    }

    std::optional<Vector> dir;
    if (f.curvature) {
      const Matrix c = f.curvature(x);
      dir = free_direction(c, g, free);
    }
    if (!dir) dir = free_direction(bfgs, g, free);
    if (!dir || !(g.dot(*dir) > 0.0)) {
      bfgs.setIdentity();
      bfgs_scaled = false;
      dir = Vector::Zero(d);
      for (auto i : free) (*dir)[i] = g[i];
    }

    // Backtracking along the projection arc; a steepest-ascent retry follows
    // a failed quasi-Newton search.
    bool accepted = false;
    Vector x_new;
    double f_new = kNegInf;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        Vector sd = Vector::Zero(d);
        for (auto i : free) sd[i] = g[i];
        if ((sd - *dir).cwiseAbs().maxCoeff() == 0.0) break;
        dir = sd;
        bfgs.setIdentity();
        bfgs_scaled = false;
      }
      double t = 1.0;
      if (attempt == 1) t = 1.0 / std::max(1.0, dir->cwiseAbs().maxCoeff());
      for (int bt = 0; bt < opt.max_backtracks; ++bt, t *= opt.shrink) {
        x_new = bounds.project(x + t * (*dir));
        const Vector step = x_new - x;
        if (step.cwiseAbs().maxCoeff() == 0.0) break;
        f_new = safe_value(f, x_new);
        if (!std::isfinite(f_new)) continue;
        const double gain = g.dot(step);
        if (f_new >= fx + opt.armijo * gain) {
          accepted = true;
          break;
        }
        // Predicted gain below the rounding of f: decide on the gradient.
        if (gain <= 1e-13 * (1.0 + std::abs(fx)) && f_new >= fx - 1e-14 * (1.0 + std::abs(fx))) {
          const Vector g_try = gradient_of(f, x_new);
          if (g_try.allFinite() &&
              projected_gradient_norm(x_new, g_try, bounds) < projected_gradient_norm(x, g, bounds)) {
            accepted = true;
            break;
          }
        }
      }
    }
    if (!accepted) break;

    Vector g_new = gradient_of(f, x_new);
    if (!g_new.allFinite()) break;
    const Vector s = x_new - x;
    const Vector y = g - g_new;  // curvature of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!bfgs_scaled) {
        bfgs = Matrix::Identity(d, d) * (y.squaredNorm() / sy);
        bfgs_scaled = true;
      }
      const Vector bs = bfgs * s;
      bfgs += (y * y.transpose()) / sy - (bs * bs.transpose()) / s.dot(bs);
    }
    x = x_new;
    fx = f_new;
    g = g_new;
  }
  res.point = x;
  res.value = fx;
  res.iterations = it;
  res.projected_gradient = projected_gradient_norm(x, g, bounds);
  if (!res.converged) {
    res.converged = res.projected_gradient <= opt.tolerance * std::max(1.0, x.cwiseAbs().maxCoeff());
  }
  res.active_set = active_indices(x, bounds, opt.active_tolerance);
  return res;
}

}  // namespace

FitResult maximize_box(const Objective& f, const Vector& start, const Bounds& bounds,
                       const OptimizeOptions& options) {
  if (start.size() != bounds.dim()) throw Error(ErrorKind::DimensionMismatch, "start vs bounds");
  if (!bounds.contains(start)) throw Error(ErrorKind::InfeasibleStart, "start outside bounds");
  FitResult best = ascend(f, start, bounds, options);
  if (options.multistart > 0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < options.multistart; ++k) {
      Vector s = start;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        s[i] += options.jitter * std::max(1.0, std::abs(start[i])) * unif(rng);
      }
      s = bounds.project(s);
      if (!std::isfinite(f.value(s))) continue;
      FitResult r = ascend(f, s, bounds, options);
      if ((r.converged && !best.converged) ||
          (r.converged == best.converged && r.value > best.value)) {
        best = std::move(r);
      }
    }
  }
  return best;
}

namespace {

/// Affine map theta = base + T z between reduced and full coordinates.
struct Embedding {
  Vector base;
  Matrix t;

  [[nodiscard]] Vector full(const Vector& z) const { return base + t * z; }
};

Objective reduce(const Objective& f, const Embedding& emb) {
  Objective r;
  r.value = [f, emb](const Vector& z) { return f.value(emb.full(z)); };
  r.gradient = [f, emb](const Vector& z) -> Vector {
    return emb.t.transpose() * gradient_of(f, emb.full(z));
  };
  if (f.curvature) {
    r.curvature = [f, emb](const Vector& z) -> Matrix {
      return emb.t.transpose() * f.curvature(emb.full(z)) * emb.t;
    };
  }
  return r;
}

FitResult embed_result(const FitResult& red, const Embedding& emb, const Bounds& bounds,
                       const OptimizeOptions& opt) {
  FitResult out = red;
  out.point = bounds.project(emb.full(red.point));
  out.active_set = active_indices(out.point, bounds, opt.active_tolerance);
  return out;
}

}  // namespace

FitResult maximize_fixed(const Objective& f, const Vector& start, const Bounds& bounds,
                         const std::map<Eigen::Index, double>& fixed,
                         const OptimizeOptions& options) {
  const Eigen::Index d = start.size();
  if (d != bounds.dim()) throw Error(ErrorKind::DimensionMismatch, "start vs bounds");
  Vector base = start;
  for (const auto& [i, v] : fixed) {
    if (i < 0 || i >= d) throw Error(ErrorKind::DimensionMismatch, "fixed index out of range");
    if (v < bounds.lower[i] || v > bounds.upper[i]) {
      throw Error(ErrorKind::InfeasibleStart, "fixed value outside bounds");
    }
    base[i] = v;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!fixed.count(i)) free.push_back(i);
  }
  if (free.empty()) {
    const double v = f.value(base);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEvaluation, "objective at pinned point");
    FitResult out;
    out.point = base;
    out.value = v;
    out.converged = true;
    out.iterations = 0;
    out.active_set = active_indices(base, bounds, options.active_tolerance);
    return out;
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  Embedding emb{base, Matrix::Zero(d, nf)};
  Vector z0(nf);
  Vector lo(nf);
  Vector hi(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    emb.base[free[a]] = 0.0;
    emb.t(free[a], a) = 1.0;
    z0[a] = start[free[a]];
    lo[a] = bounds.lower[free[a]];
    hi[a] = bounds.upper[free[a]];
  }
  FitResult red = maximize_box(reduce(f, emb), z0, Bounds(lo, hi), options);
  return embed_result(red, emb, bounds, options);
}

FitResult maximize_linear(const Objective& f, const Vector& start, const Bounds& bounds,
                          const Vector& coefficients, double target,
                          const OptimizeOptions& options) {
  const Eigen::Index d = start.size();
  if (coefficients.size() != d || d != bounds.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "linear restriction dimension");
  }
  // Eliminate the unbounded coordinate with the largest coefficient, or the
  // largest coefficient overall.
  Eigen::Index elim = -1;
  for (int pass = 0; pass < 2 && elim < 0; ++pass) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool unbounded = std::isinf(bounds.lower[i]) && std::isinf(bounds.upper[i]);
      if (pass == 0 && !unbounded) continue;
      if (std::abs(coefficients[i]) > best) {
        best = std::abs(coefficients[i]);
        elim = i;
      }
    }
  }
  if (elim < 0) throw Error(ErrorKind::RankDeficientJacobian, "all restriction coefficients are zero");

  const double ce = coefficients[elim];
  Embedding emb{Vector::Zero(d), Matrix::Zero(d, d - 1)};
  emb.base[elim] = target / ce;
  Vector z0(d - 1);
  Vector lo(d - 1);
  Vector hi(d - 1);
  for (Eigen::Index i = 0, a = 0; i < d; ++i) {
    if (i == elim) continue;
    emb.t(i, a) = 1.0;
    emb.t(elim, a) = -coefficients[i] / ce;
    z0[a] = start[i];
    lo[a] = bounds.lower[i];
    hi[a] = bounds.upper[i];
    ++a;
  }
  const Vector full0 = emb.full(z0);
  if (!bounds.contains(full0)) {
    throw Error(ErrorKind::InfeasibleStart, "start does not admit a feasible restricted point");
  }
  Objective red = reduce(f, emb);
  const auto value = red.value;
  red.value = [value, emb, bounds](const Vector& z) {
    const Vector full = emb.full(z);
    if (!bounds.contains(full)) return kNegInf;
    return value(z);
  };
  FitResult r = maximize_box(red, z0, Bounds(lo, hi), options);
  FitResult out = r;
  out.point = emb.full(r.point);
  out.active_set = active_indices(out.point, bounds, options.active_tolerance);
  return out;
}

}  // namespace lrca
