// Copyright 2026 The dpsurv Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsurv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace dpsurv {
namespace {

constexpr double kSufficientDecrease = 1e-4;
constexpr double kCurvature = 0.9;
// Slack on the objective for the approximate Wolfe test, relative to |f|.
constexpr double kApproxWolfeSlack = 1e-12;
constexpr int kMaxLineEvals = 60;
constexpr double kMaxStep = 1e10;

struct LinePoint {
  double alpha;
  double phi;
  double dphi;
};

class LineSearch {
 public:
  LineSearch(const ValueAndGradient& fn, const Eigen::VectorXd& x, double phi0,
             double dphi0, const Eigen::VectorXd& dir)
      : fn_(fn),
        x_(x),
        dir_(dir),
        phi0_(phi0),
        dphi0_(dphi0),
        slack_(kApproxWolfeSlack * (1.0 + std::abs(phi0))) {}

  // On success the accepted point is left in trial_x(), trial_f(), trial_g().
  bool run(double alpha) {
    LinePoint prev{0.0, phi0_, dphi0_};
    for (int i = 0; i < kMaxLineEvals; ++i) {
      const LinePoint cur = eval(alpha);
      if (acceptable(cur)) return true;
      if (!sufficient(cur) || (i > 0 && cur.phi >= prev.phi)) {
        return zoom(prev, cur);
      }
      if (cur.dphi >= 0.0) return zoom(cur, prev);
      prev = cur;
      alpha = std::min(2.0 * alpha, kMaxStep);
    }
    return false;
  }

  const Eigen::VectorXd& trial_x() const { return trial_x_; }
  const Eigen::VectorXd& trial_g() const { return trial_g_; }
  double trial_f() const { return trial_f_; }

 private:
  LinePoint eval(double alpha) {
    trial_x_ = x_ + alpha * dir_;
    trial_f_ = fn_(trial_x_, trial_g_);
    if (!std::isfinite(trial_f_) || !trial_g_.allFinite()) {
      throw OptimizationError("objective is not finite during line search", x_);
    }
    return {alpha, trial_f_, trial_g_.dot(dir_)};
  }

  bool sufficient(const LinePoint& pt) const {
    return pt.phi <= phi0_ + kSufficientDecrease * pt.alpha * dphi0_;
  }

  bool acceptable(const LinePoint& pt) const {
    if (sufficient(pt) && std::abs(pt.dphi) <= -kCurvature * dphi0_) return true;
    // Approximate Wolfe: (2 c1 - 1) phi'(0) >= phi'(a) >= c2 phi'(0).
    return pt.phi <= phi0_ + slack_ &&
           pt.dphi <= (2.0 * kSufficientDecrease - 1.0) * dphi0_ &&
           pt.dphi >= kCurvature * dphi0_;
  }

  static double interpolate(const LinePoint& lo, const LinePoint& hi) {
    const double width = hi.alpha - lo.alpha;
    const double d1 = lo.dphi + hi.dphi - 3.0 * (lo.phi - hi.phi) / (lo.alpha - hi.alpha);
    const double disc = d1 * d1 - lo.dphi * hi.dphi;
    double alpha = lo.alpha + 0.5 * width;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), width);
      const double cubic =
          hi.alpha - width * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
      const double a = std::min(lo.alpha, hi.alpha) + 0.1 * std::abs(width);
      const double b = std::max(lo.alpha, hi.alpha) - 0.1 * std::abs(width);
      if (std::isfinite(cubic) && cubic >= a && cubic <= b) alpha = cubic;
    }
    return alpha;
  }

  // `lo` satisfies sufficient decrease with the lowest value seen so far;
  // the minimizer along the line lies between lo and hi.
  bool zoom(LinePoint lo, LinePoint hi) {
    for (int i = 0; i < kMaxLineEvals; ++i) {
      if (std::abs(hi.alpha - lo.alpha) <=
          std::numeric_limits<double>::epsilon() * std::max(1.0, lo.alpha)) {
        break;
      }
      const LinePoint cur = eval(interpolate(lo, hi));
      if (acceptable(cur)) return true;
      if (!sufficient(cur) || cur.phi >= lo.phi) {
        hi = cur;
      } else {
        if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    // Fall back to the best decreasing point found, if any.
    if (lo.alpha > 0.0 && lo.phi < phi0_) {
      eval(lo.alpha);
      return true;
    }
    return false;
  }

  const ValueAndGradient& fn_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double phi0_;
  double dphi0_;
  double slack_;
  Eigen::VectorXd trial_x_;
  Eigen::VectorXd trial_g_;
  double trial_f_ = 0.0;
};

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion: returns -H g for the implicit inverse Hessian H.
Eigen::VectorXd search_direction(const std::deque<Correction>& memory,
                                 const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * memory[k].s.dot(q);
    q.noalias() -= alpha[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const Correction& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q.noalias() += (alpha[k] - beta) * memory[k].s;
  }
  return -q;
}

}  // namespace

OptimResult minimize(const ValueAndGradient& objective,
                     const Eigen::VectorXd& x0, const OptimSettings& settings) {
  if (!(settings.grad_tol > 0.0)) throw ConfigError("grad_tol must be > 0");
  if (settings.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (settings.memory < 1) throw ConfigError("memory must be >= 1");

  OptimResult result;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw OptimizationError("objective is not finite at the start point", x);
  }
  result.trace.push_back(f);

  std::deque<Correction> memory;
  double grad_norm = g.norm();
  while (grad_norm > settings.grad_tol && result.iterations < settings.max_iters) {
    Eigen::VectorXd dir = search_direction(memory, g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -g;
      slope = -grad_norm * grad_norm;
    }
    const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / grad_norm) : 1.0;

    LineSearch search(objective, x, f, slope, dir);
    if (!search.run(alpha0)) {
      if (!memory.empty()) {
        // Retry once along steepest descent with a fresh model.
        memory.clear();
        continue;
      }
      result.message = "line search failed";
      break;
    }

    Correction c{search.trial_x() - x, search.trial_g() - g, 0.0};
    const double sy = c.s.dot(c.y);
    if (sy > 1e-12 * c.s.norm() * c.y.norm()) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > settings.memory) memory.pop_front();
    }
    x = search.trial_x();
    g = search.trial_g();
    f = search.trial_f();
    grad_norm = g.norm();
    ++result.iterations;
    result.trace.push_back(f);
  }

  result.minimizer = std::move(x);
  result.value = f;
  result.grad_norm = grad_norm;
  result.converged = grad_norm <= settings.grad_tol;
  if (result.message.empty()) {
    result.message = result.converged ? "converged" : "iteration limit reached";
  }
  return result;
}

}  // namespace dpsurv
