#include "chainverifier/diff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainverifier/errors.hpp"

namespace chainverifier {

std::string_view to_string(DerivativeRoute route) {
  return route == DerivativeRoute::kDual ? "dual" : "finite-difference";
}

double fd_step(double c) { return std::max(1e-6, 1e-6 * std::abs(c)); }

namespace {

StepJacobians dual_jacobians(const ModelSpec& model, const StateVector& x, const ControlBlock& w) {
  const int n = model.n;
  const int p = model.p;
  std::vector<Dual> xs(n), wsd(p);
  for (int i = 0; i < n; ++i) xs[i] = Dual(x[i]);
  for (int i = 0; i < p; ++i) wsd[i] = Dual(w[i]);

  StepJacobians jac{Matrix(n, n), Matrix(n, p), DerivativeRoute::kDual};
  auto column = [&](Matrix& dst, int col) {
    const auto out = model.step_dual(xs, wsd);
    if (static_cast<int>(out.size()) != n) throw DifferentiationError("dual step returned wrong length");
    for (int r = 0; r < n; ++r) dst(r, col) = out[r].d;
  };
  for (int j = 0; j < n; ++j) {
    xs[j].d = 1.0;
    column(jac.dx, j);
    xs[j].d = 0.0;
  }
  for (int j = 0; j < p; ++j) {
    wsd[j].d = 1.0;
    column(jac.dw, j);
    wsd[j].d = 0.0;
  }
  return jac;
}

StepJacobians fd_jacobians(const ModelSpec& model, const StateVector& x, const ControlBlock& w) {
  const int n = model.n;
  const int p = model.p;
  StepJacobians jac{Matrix(n, n), Matrix(n, p), DerivativeRoute::kFiniteDifference};
  StateVector xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double h = fd_step(x[j]);
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.dx.col(j) = (model.step(xp, w) - model.step(xm, w)) / (xp[j] - xm[j]);
    xp[j] = xm[j] = x[j];
  }
  ControlBlock wp = w, wm = w;
  for (int j = 0; j < p; ++j) {
    const double h = fd_step(w[j]);
    wp[j] = w[j] + h;
    wm[j] = w[j] - h;
    jac.dw.col(j) = (model.step(x, wp) - model.step(x, wm)) / (wp[j] - wm[j]);
    wp[j] = wm[j] = w[j];
  }
  return jac;
}

}  // namespace

StepJacobians step_jacobians(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                             const DiffOptions& opts) {
  check_state(model, x);
  check_block(model, w);
  if (!opts.allow_nonsmooth && model.smooth_at && !model.smooth_at(x, w)) {
    throw DifferentiationError("model '" + model.name +
                               "' refuses differentiation at this point (tied selection)");
  }
  StepJacobians jac = (model.step_dual && !opts.force_finite_differences)
                          ? dual_jacobians(model, x, w)
                          : fd_jacobians(model, x, w);
  if (!jac.dx.allFinite() || !jac.dw.allFinite()) {
    throw DifferentiationError("non-finite derivative entries");
  }
  return jac;
}

Matrix jacobian_x(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                  const DiffOptions& opts) {
  return step_jacobians(model, x, w, opts).dx;
}

Matrix jacobian_w(const ModelSpec& model, const StateVector& x, const ControlBlock& w,
                  const DiffOptions& opts) {
  return step_jacobians(model, x, w, opts).dw;
}

ControllabilityMatrix controllability_matrix(const ModelSpec& model, const StateVector& x,
                                             const ControlSequence& ws, const DiffOptions& opts) {
  const auto states = visited_states(model, x, ws);
  const int k = ws.length();
  const int n = model.n;
  const int p = model.p;

  ControllabilityMatrix out{Matrix(n, static_cast<Eigen::Index>(p) * k), x, ws,
                            DerivativeRoute::kDual};
  // Right to left: block i = (A_{k-1} ... A_{i+1}) B_i, product kept in `tail`.
  Matrix tail;
  for (int i = k - 1; i >= 0; --i) {
    const auto jac = step_jacobians(model, states[i], ws[i], opts);
    if (jac.route == DerivativeRoute::kFiniteDifference) out.route = jac.route;
    auto block = out.mat.middleCols(static_cast<Eigen::Index>(i) * p, p);
    if (i == k - 1) {
      block = jac.dw;
      tail = jac.dx;
    } else {
      block = tail * jac.dw;
      tail = tail * jac.dx;
    }
  }
  return out;
}

RankReport numeric_rank(const Matrix& mat, double rel_tol) {
  if (!(rel_tol > 0.0)) throw InputError("rank tolerance must be positive");
  if (!mat.allFinite()) throw NumericError("matrix has non-finite entries");
  RankReport report;
  report.tolerance = rel_tol;
  if (mat.size() == 0) return report;

  Eigen::JacobiSVD<Matrix> svd(mat);
  const Vector sv = svd.singularValues();
  if (!sv.allFinite()) throw NumericError("singular value decomposition failed");
  report.singular_values.assign(sv.data(), sv.data() + sv.size());

  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (smax > 0.0) {
    for (double s : report.singular_values) {
      const double ratio = s / smax;
      if (ratio > rel_tol) ++report.numeric_rank;
      if (ratio > rel_tol * 1e-2 && ratio < rel_tol * 1e2) report.borderline = true;
    }
  }
  report.full_rank = report.numeric_rank == mat.rows();
  return report;
}

RankWitness assess_rank(const ModelSpec& model, const StateVector& x, const ControlSequence& ws,
                        double rel_tol) {
  if (!in_control_set(model, x, ws)) {
    throw InvalidWitnessError("control sequence is not in the control set O_x^k of the base point");
  }
  auto c = controllability_matrix(model, x, ws);
  RankWitness witness{x, ws, c.mat, numeric_rank(c.mat, rel_tol), c.route};
  return witness;
}

bool rank_condition(const ModelSpec& model, const StateVector& x, const ControlSequence& ws,
                    double rel_tol) {
  return assess_rank(model, x, ws, rel_tol).report.full_rank;
}

}  // namespace chainverifier
