#include "finsler/distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace finsler {

std::string_view to_string(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::closed_form: return "closed-form";
    case DistanceMethod::shooting: return "shooting";
    case DistanceMethod::lattice_fallback: return "lattice-fallback";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double segment_length(const FinslerStructure& F, const Vec& a, const Vec& b) {
  const Vec d = b - a;
  if (F.point_independent()) return F.model().norm(a, d);
  static constexpr std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                               0.8611363115940526};
  static constexpr std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                 0.3478548451374538};
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double s = 0.5 * (1.0 + nodes[k]);
    sum += 0.5 * weights[k] * F.model().norm(a + s * d, d);
  }
  return sum;
}

// Segment length with pieces no longer than `piece` (Euclidean).
double fine_segment_length(const FinslerStructure& F, const Vec& a, const Vec& b, double piece) {
  if (F.point_independent()) return F.model().norm(a, b - a);
  const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / piece)));
  double sum = 0.0;
  for (int k = 0; k < m; ++k) sum += segment_length(F, a + (b - a) * (double(k) / m), a + (b - a) * (double(k + 1) / m));
  return sum;
}

bool segment_inside(const ManifoldChart& chart, const Vec& a, const Vec& b) {
  // the chart is a box, hence convex
  return chart.contains(a) && chart.contains(b);
}

int node_budget(int n) {
  switch (n) {
    case 2: return 241;
    case 3: return 61;
    default: return 21;
  }
}

struct Shot {
  GeodesicState end;
  std::vector<Vec> path;
};

Shot shoot(const FinslerStructure& F, const Vec& p, const Vec& w, int steps, int path_samples) {
  Shot out;
  if (path_samples <= 0) {
    out.end = flow_steps(F, {p, w}, 1.0, steps);
    return out;
  }
  out.path.reserve(path_samples + 1);
  out.path.push_back(p);
  GeodesicState s{p, w};
  const double dt = 1.0 / steps;
  int done = 0;
  for (int k = 1; k <= path_samples; ++k) {
    const int target = static_cast<int>((static_cast<long long>(steps) * k) / path_samples);
    if (target > done) {
      if (F.point_independent()) {
        s.x = p + w * (double(target) / steps);
      } else {
        for (int i = done; i < target; ++i) s = spray_step(F, s, dt);
      }
      done = target;
    }
    out.path.push_back(s.x);
  }
  out.end = s;
  return out;
}

double metric_miss(const FinslerStructure& F, const Vec& q, const Vec& e) {
  const Vec d = e - q;
  return std::max(F.model().norm(q, d), F.model().norm(q, -d));
}

int steps_for(double length, double dt) {
  return std::max(1, static_cast<int>(std::ceil(length / dt - 1e-9)));
}

struct NewtonOutcome {
  bool converged = false;
  Vec w;
  int steps = 0;
  int iterations = 0;
  double miss = kInf;
};

// Newton on w -> endpoint(p, w) = q with finite-difference Jacobians and
// Broyden updates between refreshes. The step count is frozen inside each
// iteration so the map is smooth.
NewtonOutcome newton_shoot(const FinslerStructure& F, const Vec& p, const Vec& q, Vec w, const DistanceOptions& opt) {
  NewtonOutcome out;
  const auto n = p.size();
  auto endpoint = [&](const Vec& z, int steps) -> std::optional<Vec> {
    try {
      return flow_steps(F, {p, z}, 1.0, steps).x;
    } catch (const DomainExit&) {
      return std::nullopt;
    }
  };
  auto length = [&](const Vec& z) { return F.model().norm(p, z); };

  int steps = steps_for(length(w), opt.step);
  auto e = endpoint(w, steps);
  if (!e) return out;
  Vec r = *e - q;
  double miss = metric_miss(F, q, *e);
  Mat J;  // empty: refresh by finite differences
  bool from_fd = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    if (miss <= opt.miss_tolerance) break;
    if (J.size() == 0) {
      J.resize(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        // shrink the step until the endpoint response is in the linear regime
        double h = 1e-7 * std::max(w.norm(), 1e-3);
        std::optional<Vec> ep;
        for (int shrink = 0; shrink < 4; ++shrink) {
          Vec wp = w;
          wp[j] += h;
          ep = endpoint(wp, steps);
          if (!ep) break;
          const double moved = std::max(F.model().norm(q, *ep - *e), 1e-300);
          if (moved <= 1e-4) break;
          h *= 0.5e-4 / moved;
        }
        if (ep) {
          J.col(j) = (*ep - *e) / h;
          continue;
        }
        Vec wm = w;
        wm[j] -= h;
        auto em = endpoint(wm, steps);
        if (!em) {
          J.resize(0, 0);
          break;
        }
        J.col(j) = (*e - *em) / h;
      }
      if (J.size() == 0) break;
      from_fd = true;
    }
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible()) break;
    const Vec delta = -lu.solve(r);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12 && !accepted; ++k, lambda *= 0.5) {
      const Vec trial = w + lambda * delta;
      if (!(length(trial) > 0.0)) continue;
      auto et = endpoint(trial, steps);
      if (!et) continue;
      const double mt = metric_miss(F, q, *et);
      if (!(mt < miss)) continue;
      const Vec s = trial - w;
      const Vec rt = *et - q;
      if (k == 0) {
        J += ((rt - r) - J * s) * s.transpose() / s.squaredNorm();
        from_fd = false;
      } else {
        J.resize(0, 0);
      }
      w = trial;
      r = rt;
      e = et;
      miss = mt;
      accepted = true;
    }
    if (!accepted) {
      if (from_fd) break;
      J.resize(0, 0);
      continue;
    }
    // step count follows the current length
    const int new_steps = steps_for(length(w), opt.step);
    if (new_steps != steps) {
      steps = new_steps;
      auto e2 = endpoint(w, steps);
      if (!e2) return out;
      e = e2;
      r = *e - q;
      miss = metric_miss(F, q, *e);
    }
    out.iterations = it + 1;
  }
  // a stalled solve is still usable when the first-variation correction
  // leaves a second-order error below the acceptance bound
  if (miss <= opt.miss_tolerance || miss <= opt.accept_miss) out.converged = true;
  out.w = w;
  out.steps = steps;
  out.miss = miss;
  return out;
}

DistanceResult finish_shooting(const FinslerStructure& F, const Vec& p, const Vec& q, const NewtonOutcome& nw,
                               DistanceMethod method, const DistanceOptions& opt) {
  DistanceResult res;
  res.from = p;
  res.to = q;
  res.method = method;
  res.iterations = nw.iterations;
  Shot shot = shoot(F, p, nw.w, nw.steps, opt.path_samples);
  const GeodesicState& end = shot.end;
  const double L = F.model().norm(p, nw.w);
  const double end_speed = F.model().norm(end.x, end.v);
  const Vec u_end = end.v / end_speed;
  // first variation: d(p, q) = L + J(e, u)(q - e) + O(miss^2)
  const double correction = F.model().legendre(end.x, u_end).dot(q - end.x);
  res.value = L + correction;
  res.miss = metric_miss(F, q, end.x);
  res.initial_velocity = nw.w / L;
  res.final_velocity = u_end;
  res.path = std::move(shot.path);
  res.path.back() = q;
  const double drift = std::abs(end_speed / L - 1.0) * L;
  res.error_estimate = std::max({res.miss * res.miss, drift, 1e-12 * (1.0 + L)});
  return res;
}

std::vector<Vec> ring_directions(int n) {
  const int count = 4 * n + 8;
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      dirs.push_back(make_vec({std::cos(th), std::sin(th)}));
    }
  } else {
    Rng rng(0x51ee7ULL + n);
    for (int k = 0; k < count; ++k) dirs.push_back(rng.direction(n));
  }
  return dirs;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Follows the unit-speed geodesic in the chord direction and returns the
// chord direction scaled to the arc length of closest Euclidean approach to q.
std::optional<Vec> aimed_chord_seed(const FinslerStructure& F, const Vec& p, const Vec& q, double dt) {
  const Vec chord = q - p;
  const Vec u = chord / F.model().norm(p, chord);
  const double cap = 4.0 * std::max(F.model().norm(p, chord), F.model().norm(q, chord)) + 1.0;
  GeodesicState s{p, u};
  double best = chord.norm();
  double best_t = 0.0;
  double t = 0.0;
  try {
    while (t < cap) {
      s = spray_step(F, s, dt);
      t += dt;
      const double gap = (s.x - q).norm();
      if (gap < best) {
        best = gap;
        best_t = t;
      } else if (t - best_t > 1.0 && gap > 2.0 * best) {
        break;
      }
    }
  } catch (const DomainExit&) {
  }
  if (best_t == 0.0) return std::nullopt;
  return u * best_t;
}

NewtonOutcome chord_continuation(const FinslerStructure& F, const Vec& p, const Vec& q, const DistanceOptions& opt) {
  constexpr int kMaxHops = 400;
  const Vec chord = q - p;
  double s = 0.0;
  Vec w;
  NewtonOutcome last;
  for (int hop = 0; hop < kMaxHops && s < 1.0; ++hop) {
    const Vec from = p + s * chord;
    double ds = 1.0 - s;
    for (int k = 0; k < 60; ++k) {
      const Vec to = p + (s + ds) * chord;
      const double local = std::max(F.model().norm(from, ds * chord), F.model().norm(to, ds * chord));
      if (local <= 1.0) break;
      ds *= 0.5;
    }
    const double next = (s + ds >= 1.0 - 1e-12) ? 1.0 : s + ds;
    const Vec target = p + next * chord;
    Vec seed;
    if (hop == 0) {
      seed = target - p;
    } else {
      const double L = F.model().norm(p, w);
      seed = w * ((L + F.model().norm(from, target - from)) / L);
    }
    last = newton_shoot(F, p, target, seed, opt);
    if (!last.converged) return last;
    w = last.w;
    s = next;
  }
  if (s < 1.0) last.converged = false;
  return last;
}

}  // namespace

double polyline_length(const FinslerStructure& F, const std::vector<Vec>& path) {
  double sum = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) sum += segment_length(F, path[i - 1], path[i]);
  return sum;
}

LatticePath lattice_distance(const FinslerStructure& F, const Vec& p, const Vec& q, double spacing, bool smooth) {
  const ManifoldChart& chart = F.chart();
  chart.require_contains(p, "lattice start");
  chart.require_contains(q, "lattice target");
  const int n = F.dimension();
  const double sep = (q - p).norm();
  LatticePath out;
  if (sep == 0.0) {
    out.path = {p};
    return out;
  }
  double h = spacing > 0.0 ? spacing : std::min(0.05, sep / 40.0);
  const double margin = 0.25 * sep;
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = std::min(p[i], q[i]) - margin;
    hi[i] = std::max(p[i], q[i]) + margin;
  }
  const int budget = node_budget(n);
  const double extent = (hi - lo).maxCoeff();
  if (spacing <= 0.0 && extent / h + 1 > budget) h = extent / (budget - 1);
  Vec kmin(n), kmax(n);
  std::vector<int> count(n), lower(n);
  long long total = 1;
  for (int i = 0; i < n; ++i) {
    double a = lo[i], b = hi[i];
    // stay strictly inside the chart
    if (std::isfinite(chart.lower()[i])) a = std::max(a, chart.lower()[i] + 0.5 * h);
    if (std::isfinite(chart.upper()[i])) b = std::min(b, chart.upper()[i] - 0.5 * h);
    lower[i] = static_cast<int>(std::ceil((a - p[i]) / h));
    const int upper = static_cast<int>(std::floor((b - p[i]) / h));
    count[i] = std::max(1, upper - lower[i] + 1);
    total *= count[i];
  }
  if (total > 4'000'000) throw SolverError("lattice grid too large", kInf);
  out.spacing = h;
  out.nodes_per_axis = *std::max_element(count.begin(), count.end());

  auto node = [&](long long idx) {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(idx % count[i]) + lower[i];
      idx /= count[i];
      x[i] = p[i] + h * k;
    }
    return x;
  };
  auto index_of = [&](const std::vector<int>& k) {
    long long idx = 0;
    for (int i = n - 1; i >= 0; --i) idx = idx * count[i] + (k[i] - lower[i]);
    return idx;
  };
  // stencil {-1,0,1}^n without the origin
  std::vector<std::vector<int>> stencil;
  const int combos = static_cast<int>(std::pow(3, n));
  for (int c = 0; c < combos; ++c) {
    std::vector<int> off(n);
    int t = c;
    bool zero = true;
    for (int i = 0; i < n; ++i) {
      off[i] = t % 3 - 1;
      t /= 3;
      zero = zero && off[i] == 0;
    }
    if (!zero) stencil.push_back(off);
  }

  std::vector<double> dist(static_cast<std::size_t>(total), kInf);
  std::vector<long long> prev(static_cast<std::size_t>(total), -1);
  std::vector<int> origin(n, 0);
  const long long start = index_of(origin);
  dist[start] = 0.0;
  using Item = std::pair<double, long long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.push({0.0, start});
  std::vector<int> k(n), kn(n);
  while (!heap.empty()) {
    auto [d, idx] = heap.top();
    heap.pop();
    if (d > dist[idx]) continue;
    long long t = idx;
    for (int i = 0; i < n; ++i) {
      k[i] = static_cast<int>(t % count[i]) + lower[i];
      t /= count[i];
    }
    const Vec x = node(idx);
    for (const auto& off : stencil) {
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        kn[i] = k[i] + off[i];
        if (kn[i] < lower[i] || kn[i] >= lower[i] + count[i]) ok = false;
      }
      if (!ok) continue;
      const long long j = index_of(kn);
      Vec delta(n);
      for (int i = 0; i < n; ++i) delta[i] = h * off[i];
      const Vec mid = x + 0.5 * delta;
      if (!chart.contains(mid)) continue;
      const double w = F.model().norm(mid, delta);
      if (d + w < dist[j]) {
        dist[j] = d + w;
        prev[j] = idx;
        heap.push({dist[j], j});
      }
    }
  }
  // best exit node near q
  std::vector<int> kq(n);
  for (int i = 0; i < n; ++i) kq[i] = static_cast<int>(std::floor((q[i] - p[i]) / h));
  double best = kInf;
  long long best_idx = -1;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      kn[i] = kq[i] + ((c >> i) & 1);
      if (kn[i] < lower[i] || kn[i] >= lower[i] + count[i]) ok = false;
    }
    if (!ok) continue;
    const long long j = index_of(kn);
    if (!std::isfinite(dist[j])) continue;
    const Vec x = node(j);
    const double total_len = dist[j] + segment_length(F, x, q);
    if (total_len < best) {
      best = total_len;
      best_idx = j;
    }
  }
  if (best_idx < 0) throw SolverError("lattice does not reach the target", kInf);
  std::vector<Vec> path{q};
  for (long long j = best_idx; j >= 0; j = prev[j]) path.push_back(node(j));
  std::reverse(path.begin(), path.end());
  path.front() = p;
  out.path = path;
  out.length = polyline_length(F, path);
  if (!smooth || path.size() <= 2) return out;

  // greedy shortcutting
  const double piece = h;
  std::vector<double> cumulative(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i)
    cumulative[i] = cumulative[i - 1] + fine_segment_length(F, path[i - 1], path[i], piece);
  std::vector<Vec> shortcut{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = path.size() - 1; j > i + 1; --j) {
      if (!segment_inside(chart, path[i], path[j])) continue;
      if (fine_segment_length(F, path[i], path[j], piece) <= cumulative[j] - cumulative[i] + 1e-14) {
        next = j;
        break;
      }
    }
    shortcut.push_back(path[next]);
    i = next;
  }

  // resample and relax interior vertices
  if (!F.point_independent()) {
    constexpr int kVertices = 32;
    std::vector<double> arc(shortcut.size(), 0.0);
    for (std::size_t s = 1; s < shortcut.size(); ++s) arc[s] = arc[s - 1] + (shortcut[s] - shortcut[s - 1]).norm();
    std::vector<Vec> poly;
    std::size_t seg = 1;
    for (int v = 0; v <= kVertices; ++v) {
      const double target = arc.back() * v / kVertices;
      while (seg + 1 < shortcut.size() && arc[seg] < target) ++seg;
      const double span = arc[seg] - arc[seg - 1];
      const double s = span > 0.0 ? (target - arc[seg - 1]) / span : 0.0;
      poly.push_back(shortcut[seg - 1] + std::clamp(s, 0.0, 1.0) * (shortcut[seg] - shortcut[seg - 1]));
    }
    poly.front() = p;
    poly.back() = q;
    for (int sweep = 0; sweep < 40; ++sweep) {
      for (int v = 1; v < kVertices; ++v) {
        auto local = [&](const Vec& x) {
          if (!chart.contains(x)) return kInf;
          return segment_length(F, poly[v - 1], x) + segment_length(F, x, poly[v + 1]);
        };
        const double c0 = local(poly[v]);
        const double fd = 1e-6 * std::max(1.0, poly[v].norm());
        Vec grad(n);
        for (int d = 0; d < n; ++d) {
          Vec a = poly[v], b = poly[v];
          a[d] += fd;
          b[d] -= fd;
          grad[d] = (local(a) - local(b)) / (2.0 * fd);
        }
        if (!grad.allFinite() || grad.norm() == 0.0) continue;
        double step = 0.25 * (poly[v + 1] - poly[v - 1]).norm();
        const Vec dir = -grad / grad.norm();
        for (int tries = 0; tries < 20; ++tries) {
          const Vec trial = poly[v] + step * dir;
          if (local(trial) < c0) {
            poly[v] = trial;
            break;
          }
          step *= 0.5;
        }
      }
    }
    shortcut = std::move(poly);
  }
  const double smoothed = polyline_length(F, shortcut);
  if (smoothed <= out.length) {
    out.path = std::move(shortcut);
    out.length = smoothed;
  }
  return out;
}

DistanceResult distance(const FinslerStructure& F, const Vec& p, const Vec& q, const DistanceOptions& opt) {
  const ManifoldChart& chart = F.chart();
  chart.require_contains(p, "distance start");
  chart.require_contains(q, "distance target");
  DistanceResult res;
  res.from = p;
  res.to = q;
  if (p == q) return res;
  if (opt.cache) {
    if (auto hit = opt.cache->find(F.id(), p, q)) return *hit;
  }
  auto remember = [&](DistanceResult r) {
    if (opt.cache) opt.cache->store(F.id(), r);
    return r;
  };
  if (F.point_independent() && opt.closed_form) {
    const Vec d = q - p;
    res.value = F.model().norm(p, d);
    res.path = {p, q};
    res.method = DistanceMethod::closed_form;
    res.error_estimate = 4.0 * std::numeric_limits<double>::epsilon() * res.value;
    res.initial_velocity = d / res.value;
    res.final_velocity = res.initial_velocity;
    return remember(res);
  }

  // chord direction, length taken from the closest approach of its geodesic
  const Vec chord = q - p;
  NewtonOutcome nw;
  if (auto aimed = aimed_chord_seed(F, p, q, opt.step)) {
    nw = newton_shoot(F, p, q, *aimed, opt);
    if (nw.converged) return remember(finish_shooting(F, p, q, nw, DistanceMethod::shooting, opt));
  }
  nw = newton_shoot(F, p, q, chord, opt);
  if (nw.converged) return remember(finish_shooting(F, p, q, nw, DistanceMethod::shooting, opt));

  // continuation along the coordinate chord in hops of at most unit local length
  nw = chord_continuation(F, p, q, opt);
  if (nw.converged) return remember(finish_shooting(F, p, q, nw, DistanceMethod::shooting, opt));

  double upper = kInf;
  if (opt.use_lattice) {
    try {
      LatticePath lat = lattice_distance(F, p, q);
      upper = lat.length;
      if (lat.path.size() >= 2) {
        const Vec dir = lat.path[1] - lat.path[0];
        const Vec w = dir * (lat.length / F.model().norm(p, dir));
        nw = newton_shoot(F, p, q, w, opt);
        if (nw.converged) return remember(finish_shooting(F, p, q, nw, DistanceMethod::lattice_fallback, opt));
      }
    } catch (const SolverError&) {
      // lattice unavailable; continue with the ring seeds
    }
  }

  const double scale = F.model().norm(p, chord);
  std::optional<DistanceResult> best;
  for (const Vec& d : ring_directions(F.dimension())) {
    const Vec w = d * (scale / F.model().norm(p, d));
    NewtonOutcome cand = newton_shoot(F, p, q, w, opt);
    if (!cand.converged) continue;
    DistanceResult r = finish_shooting(F, p, q, cand, DistanceMethod::shooting, opt);
    if (!best || r.value < best->value - 1e-12 ||
        (std::abs(r.value - best->value) <= 1e-12 && lex_less(r.initial_velocity, best->initial_velocity)))
      best = std::move(r);
  }
  if (best) return remember(*best);
  throw SolverError("no shooting seed converged", upper);
}

}  // namespace finsler
