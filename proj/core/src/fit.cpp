#include "cmrkit/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cmrkit/rng.hpp"

namespace cmrkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_to(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

// Gaussian elimination with partial pivoting; A is destroyed, the solution
// lands in b. Returns false for a (near) singular system.
template <int N>
bool solve_linear(std::array<std::array<double, N>, N>& a,
                  std::array<double, N>& b) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const double inv = 1.0 / a[col][col];
    for (int r = col + 1; r < N; ++r) {
      const double f = a[r][col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = N - 1; col >= 0; --col) {
    double acc = b[col];
    for (int c = col + 1; c < N; ++c) acc -= a[col][c] * b[c];
    b[col] = acc / a[col][col];
  }
  for (int i = 0; i < N; ++i) {
    if (!std::isfinite(b[i])) return false;
  }
  return true;
}

struct Power1Model {
  static constexpr int P = 3;
  using Params = std::array<double, 3>;  // alpha, s, beta

  static double eval(const Params& p, double x) {
    return p[0] * std::pow(x, p[1]) + p[2];
  }
  static void jacobian_row(const Params& p, double x,
                           std::array<double, 3>& row) {
    const double xs = std::pow(x, p[1]);
    row[0] = xs;
    row[1] = p[0] * xs * std::log(x);
    row[2] = 1.0;
  }
  static void clamp(Params& p, const ParamBounds& b) {
    p[0] = clamp_to(p[0], b.alpha_lo, b.alpha_hi);
    p[1] = clamp_to(p[1], b.exp_lo, b.exp_hi);
    p[2] = clamp_to(p[2], b.offset_lo, b.offset_hi);
  }
  static bool at_lower(const Params& p, const ParamBounds& b, int i) {
    const double lo[3] = {b.alpha_lo, b.exp_lo, b.offset_lo};
    return p[i] <= lo[i];
  }
  static bool at_upper(const Params& p, const ParamBounds& b, int i) {
    const double hi[3] = {b.alpha_hi, b.exp_hi, b.offset_hi};
    return p[i] >= hi[i];
  }
};

struct Power2Model {
  static constexpr int P = 5;
  using Params = std::array<double, 5>;  // alpha2, s2, alpha3, s3, beta2

  static double eval(const Params& p, double x) {
    return p[0] * std::pow(x, p[1]) + p[2] * std::pow(x, p[3]) + p[4];
  }
  static void jacobian_row(const Params& p, double x,
                           std::array<double, 5>& row) {
    const double lx = std::log(x);
    const double xa = std::pow(x, p[1]);
    const double xb = std::pow(x, p[3]);
    row[0] = xa;
    row[1] = p[0] * xa * lx;
    row[2] = xb;
    row[3] = p[2] * xb * lx;
    row[4] = 1.0;
  }
  static void clamp(Params& p, const ParamBounds& b) {
    p[0] = clamp_to(p[0], b.alpha_lo, b.alpha_hi);
    p[1] = clamp_to(p[1], b.exp_lo, b.exp_hi);
    p[2] = clamp_to(p[2], b.alpha_lo, b.alpha_hi);
    p[3] = clamp_to(p[3], b.exp_lo, b.exp_hi);
    p[4] = clamp_to(p[4], b.offset_lo, b.offset_hi);
  }
  static bool at_lower(const Params& p, const ParamBounds& b, int i) {
    const double lo[5] = {b.alpha_lo, b.exp_lo, b.alpha_lo, b.exp_lo,
                          b.offset_lo};
    return p[i] <= lo[i];
  }
  static bool at_upper(const Params& p, const ParamBounds& b, int i) {
    const double hi[5] = {b.alpha_hi, b.exp_hi, b.alpha_hi, b.exp_hi,
                          b.offset_hi};
    return p[i] >= hi[i];
  }
};

template <class M>
double sse_of(std::span<const Point> pts, const typename M::Params& p) {
  double acc = 0.0;
  for (const auto& pt : pts) {
    const double r = M::eval(p, pt.x) - pt.y;
    acc += r * r;
  }
  return std::isfinite(acc) ? acc : kInf;
}

template <class M>
struct LmOutcome {
  typename M::Params params{};
  double sse = kInf;
  bool grad_below_tol = false;
};

// Gradient components pointing out of the active box are projected away
// before the convergence check.
template <class M>
double projected_gradient_norm(const typename M::Params& p,
                               const std::array<double, M::P>& half_grad,
                               const ParamBounds& bounds) {
  double acc = 0.0;
  for (int i = 0; i < M::P; ++i) {
    double g = 2.0 * half_grad[i];
    if (M::at_lower(p, bounds, i) && g > 0.0) g = 0.0;
    if (M::at_upper(p, bounds, i) && g < 0.0) g = 0.0;
    acc += g * g;
  }
  return std::sqrt(acc);
}

template <class M>
LmOutcome<M> lm_minimize(std::span<const Point> pts, typename M::Params p,
                         const FitOptions& opt) {
  constexpr int P = M::P;
  LmOutcome<M> out;
  double sse = sse_of<M>(pts, p);
  if (!std::isfinite(sse)) {
    out.params = p;
    return out;
  }

  double mu = 1e-3;
  bool stalled = false;

  auto build_normal_eqs = [&](const typename M::Params& q,
                              std::array<std::array<double, P>, P>& a,
                              std::array<double, P>& g) {
    for (auto& row : a) row.fill(0.0);
    g.fill(0.0);
    std::array<double, P> jrow{};
    for (const auto& pt : pts) {
      M::jacobian_row(q, pt.x, jrow);
      const double r = M::eval(q, pt.x) - pt.y;
      for (int i = 0; i < P; ++i) {
        g[i] += jrow[i] * r;
        for (int j = i; j < P; ++j) a[i][j] += jrow[i] * jrow[j];
      }
    }
    for (int i = 0; i < P; ++i) {
      for (int j = 0; j < i; ++j) a[i][j] = a[j][i];
    }
  };

  std::array<std::array<double, P>, P> jtj{};
  std::array<double, P> half_grad{};

  for (int iter = 0; iter < opt.max_iterations && !stalled; ++iter) {
    build_normal_eqs(p, jtj, half_grad);
    if (projected_gradient_norm<M>(p, half_grad, opt.bounds) < opt.grad_tol) {
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      auto damped = jtj;
      for (int i = 0; i < P; ++i) {
        damped[i][i] += mu * std::max(jtj[i][i], 1e-12);
      }
      std::array<double, P> step{};
      for (int i = 0; i < P; ++i) step[i] = -half_grad[i];
      if (!solve_linear<P>(damped, step)) {
        mu *= 4.0;
        continue;
      }
      typename M::Params next = p;
      for (int i = 0; i < P; ++i) next[i] += step[i];
      M::clamp(next, opt.bounds);
      const double next_sse = sse_of<M>(pts, next);
      if (next_sse < sse) {
        const double improvement =
            (sse - next_sse) / std::max(sse, std::numeric_limits<double>::min());
        p = next;
        sse = next_sse;
        mu = std::max(mu / 3.0, 1e-14);
        accepted = true;
        if (improvement < opt.rel_sse_tol) stalled = true;
        break;
      }
      mu *= 4.0;
      if (mu > 1e15) break;
    }
    if (!accepted) break;
  }

  build_normal_eqs(p, jtj, half_grad);
  out.params = p;
  out.sse = sse;
  out.grad_below_tol =
      projected_gradient_norm<M>(p, half_grad, opt.bounds) < opt.grad_tol;
  return out;
}

double draw_exponent(Rng& rng) {
  const double mag = std::exp(rng.uniform(std::log(0.05), std::log(2.5)));
  return rng.coin() ? mag : -mag;
}

// Half the restarts use fixed exponent seeds spread over the box; random
// draws alone can miss the basin of truths with one weak term.
constexpr double kExponentSeeds[] = {0.25, -0.25, 0.5,  -0.5, 1.0,  -1.0,
                                     1.75, -1.75, 2.5,  -2.5, 0.35, -0.35,
                                     0.7,  -0.7,  1.4,  -1.4};
constexpr int kNumExponentSeeds =
    static_cast<int>(sizeof(kExponentSeeds) / sizeof(double));

std::pair<double, double> exponent_pair_seed(int index) {
  constexpr double base[] = {-2.0, -1.2, -0.7, -0.35, 0.35, 0.7, 1.2, 2.0};
  constexpr int n = 8;
  // ordered pairs enumerated by increasing gap, then position
  int k = 0;
  for (int gap = 1; gap < n; ++gap) {
    for (int i = 0; i + gap < n; ++i) {
      if (k == index % ((n * (n - 1)) / 2)) return {base[i], base[i + gap]};
      ++k;
    }
  }
  return {base[0], base[n - 1]};
}

// Linear least squares for (alpha, beta) given the exponent.
Power1Model::Params linear_init_power1(std::span<const Point> pts, double s) {
  double sff = 0.0, sf = 0.0, sfy = 0.0, sy = 0.0;
  const double n = static_cast<double>(pts.size());
  for (const auto& pt : pts) {
    const double f = std::pow(pt.x, s);
    sff += f * f;
    sf += f;
    sfy += f * pt.y;
    sy += pt.y;
  }
  std::array<std::array<double, 2>, 2> a{{{sff, sf}, {sf, n}}};
  std::array<double, 2> b{sfy, sy};
  if (!solve_linear<2>(a, b)) {
    b = {1.0, sy / n};
  }
  return {b[0], s, b[1]};
}

Power2Model::Params linear_init_power2(std::span<const Point> pts, double sa,
                                       double sb) {
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> b{};
  for (const auto& pt : pts) {
    const std::array<double, 3> row = {std::pow(pt.x, sa), std::pow(pt.x, sb),
                                       1.0};
    for (int i = 0; i < 3; ++i) {
      b[i] += row[i] * pt.y;
      for (int j = 0; j < 3; ++j) a[i][j] += row[i] * row[j];
    }
  }
  if (!solve_linear<3>(a, b)) {
    double sy = 0.0;
    for (const auto& pt : pts) sy += pt.y;
    b = {1.0, 0.0, sy / static_cast<double>(pts.size())};
  }
  return {b[0], sa, b[1], sb, b[2]};
}

void check_points(std::span<const Point> pts, std::size_t min_count,
                  const char* who) {
  if (pts.size() < min_count) {
    throw std::invalid_argument(std::string(who) + ": needs at least " +
                                std::to_string(min_count) + " points, got " +
                                std::to_string(pts.size()));
  }
  for (const auto& pt : pts) {
    if (!(pt.x > 0.0)) {
      throw std::invalid_argument(std::string(who) +
                                  ": x values must be positive");
    }
  }
}

double sse_floor(std::span<const Point> pts) {
  double sum_y2 = 0.0;
  for (const auto& pt : pts) sum_y2 += pt.y * pt.y;
  return 1e-24 * (1.0 + sum_y2);
}

FitDiagnostics diagnostics_from_sse(std::span<const Point> pts, double sse) {
  FitDiagnostics d;
  d.n_points = static_cast<int>(pts.size());
  d.mse = sse / static_cast<double>(pts.size());
  double mean = 0.0;
  for (const auto& pt : pts) mean += pt.y;
  mean /= static_cast<double>(pts.size());
  double sst = 0.0;
  for (const auto& pt : pts) sst += (pt.y - mean) * (pt.y - mean);
  if (sst > 0.0) {
    d.r2 = 1.0 - sse / sst;
  }
  return d;
}

}  // namespace

double sum_squared_error(std::span<const Point> points, const PowerLaw1& law) {
  return sse_of<Power1Model>(points, {law.alpha, law.s, law.beta});
}

double sum_squared_error(std::span<const Point> points, const PowerLaw2& law) {
  return sse_of<Power2Model>(points,
                             {law.alpha2, law.s2, law.alpha3, law.s3, law.beta2});
}

FitDiagnostics compute_diagnostics(std::span<const Point> points,
                                   const PowerLaw1& law) {
  if (points.empty()) {
    throw std::invalid_argument("diagnostics: needs at least 1 point");
  }
  return diagnostics_from_sse(points, sum_squared_error(points, law));
}

FitDiagnostics compute_diagnostics(std::span<const Point> points,
                                   const PowerLaw2& law) {
  if (points.empty()) {
    throw std::invalid_argument("diagnostics: needs at least 1 point");
  }
  return diagnostics_from_sse(points, sum_squared_error(points, law));
}

std::pair<PowerLaw1, FitDiagnostics> fit_power1(std::span<const Point> points,
                                                const FitOptions& options) {
  check_points(points, 4, "fit_power1");
  Rng rng(options.seed);

  LmOutcome<Power1Model> best;
  int used = 0;
  const double floor = sse_floor(points);
  for (int rs = 0; rs < std::max(1, options.restarts); ++rs) {
    const double raw_s = (rs % 2 == 0)
                             ? draw_exponent(rng)
                             : kExponentSeeds[(rs / 2) % kNumExponentSeeds];
    const double s = clamp_to(raw_s, options.bounds.exp_lo,
                              options.bounds.exp_hi);
    auto init = linear_init_power1(points, s);
    Power1Model::clamp(init, options.bounds);
    auto outcome = lm_minimize<Power1Model>(points, init, options);
    ++used;
    if (outcome.sse < best.sse) best = outcome;
    if (best.sse <= floor) break;
  }

  PowerLaw1 law{best.params[0], best.params[1], best.params[2]};
  FitDiagnostics diag = diagnostics_from_sse(points, best.sse);
  diag.converged = best.grad_below_tol;
  diag.n_restarts_used = used;
  return {law, diag};
}

std::pair<PowerLaw2, FitDiagnostics> fit_power2(std::span<const Point> points,
                                                const FitOptions& options) {
  check_points(points, 6, "fit_power2");
  Rng rng(options.seed);

  LmOutcome<Power2Model> best;
  int used = 0;
  const double floor = sse_floor(points);
  for (int rs = 0; rs < std::max(1, options.restarts); ++rs) {
    double sa, sb;
    if (rs % 2 == 0) {
      sa = draw_exponent(rng);
      sb = draw_exponent(rng);
      for (int tries = 0; tries < 20 && std::abs(sa - sb) < 0.05; ++tries) {
        sb = draw_exponent(rng);
      }
    } else {
      std::tie(sa, sb) = exponent_pair_seed(rs / 2);
    }
    sa = clamp_to(sa, options.bounds.exp_lo, options.bounds.exp_hi);
    sb = clamp_to(sb, options.bounds.exp_lo, options.bounds.exp_hi);
    auto init = linear_init_power2(points, sa, sb);
    Power2Model::clamp(init, options.bounds);
    auto outcome = lm_minimize<Power2Model>(points, init, options);
    ++used;
    if (outcome.sse < best.sse) best = outcome;
    if (best.sse <= floor) break;
  }

  PowerLaw2 law = canonicalize(PowerLaw2{best.params[0], best.params[1],
                                         best.params[2], best.params[3],
                                         best.params[4]});
  FitDiagnostics diag = diagnostics_from_sse(points, best.sse);
  diag.converged = best.grad_below_tol;
  diag.n_restarts_used = used;
  diag.near_collinear = std::abs(law.s2 - law.s3) < 1e-3;
  return {law, diag};
}

}  // namespace cmrkit
