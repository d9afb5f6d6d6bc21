#pragma once

// Discrete-event simulation of the power-cycled tandem queue, in two
// variants sharing one event loop:
//
//   original    single-slot transmission buffer; a newly emitted packet
//               replaces any sitting packet, and a sitting packet is
//               discarded once its buffer sojourn reaches the deadline tau.
//   equivalent  nothing is discarded; packets emitted while the server is
//               busy accumulate, and at a service completion the whole
//               accumulation enters service as a batch if and only if its
//               youngest member has waited at most tau (otherwise the batch
//               keeps waiting and is picked up together with the next
//               emission that finds the server idle).
//
// Both variants deliver the same age trajectory in distribution; with shared
// per-source random streams they coincide sample-path by sample-path.
//
// Simultaneous events are processed in the fixed order: deadline-discard,
// emission, service-completion, OFF-end, arrival.  Ties are measure-zero
// under continuous distributions and matter only for injected samples.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <aoi/model.hpp>

namespace aoi {

enum class SimVariant { original, equivalent };

enum class PacketFate { in_flight, delivered, discarded_replaced, discarded_deadline };

struct Packet {
  std::uint64_t id = 0;
  double t_gen = 0.0;  // admission time into the compute server
  std::optional<double> t_buffer_enter;
  std::optional<double> t_service_start;
  std::optional<double> t_delivered;
  PacketFate fate = PacketFate::in_flight;
};

struct SimCounters {
  std::uint64_t n_admitted = 0;
  std::uint64_t n_emitted = 0;
  std::uint64_t n_delivered = 0;
  std::uint64_t n_blocked_at_compute = 0;
  std::uint64_t n_discarded_replaced = 0;
  std::uint64_t n_discarded_deadline = 0;
  std::uint64_t n_found_busy = 0;  // emissions that found the server mid-service
  std::uint64_t n_in_flight = 0;   // packets alive when the run stopped
  // Cheap always-on runtime checks (deadline respected, freshness monotone);
  // any nonzero value fails the property suites.
  std::uint64_t n_invariant_violations = 0;

  void add(const SimCounters& o) {
    n_admitted += o.n_admitted;
    n_emitted += o.n_emitted;
    n_delivered += o.n_delivered;
    n_blocked_at_compute += o.n_blocked_at_compute;
    n_discarded_replaced += o.n_discarded_replaced;
    n_discarded_deadline += o.n_discarded_deadline;
    n_found_busy += o.n_found_busy;
    n_in_flight += o.n_in_flight;
    n_invariant_violations += o.n_invariant_violations;
  }
};

struct SimEstimate {
  double avg_aoi = 0.0;
  double avg_aoi_hw = 0.0;  // 95% CI half-width across replications
  double avg_peak_aoi = 0.0;
  double avg_peak_aoi_hw = 0.0;
  double occ_off = 0.0;  // post-warmup occupancy fractions, sum to 1
  double occ_idle = 0.0;
  double occ_busy = 0.0;
  double measured_power = 0.0;  // = occ_idle + p_c * occ_busy by construction
  double measured_power_hw = 0.0;
  double mean_cycle = 0.0;  // mean inter-admission time
  // Per-packet moment estimates; populated by the equivalent variant where
  // every admitted packet is eventually delivered.
  double mean_xt = std::numeric_limits<double>::quiet_NaN();
  double mean_x2 = std::numeric_limits<double>::quiet_NaN();
  SimCounters counters;
  std::uint32_t replications = 0;
  bool ci_ok = true;  // half-widths within the requested relative tolerance
};

struct SimConfig {
  SimVariant variant = SimVariant::original;
  // Per-replication horizon: a delivered-packet target, or a time span when
  // target_deliveries == 0.
  std::uint64_t target_deliveries = 100'000;
  double horizon_time = 0.0;
  double warmup_fraction = 0.10;
  double warmup_time = -1.0;  // absolute override for the time horizon
  std::uint64_t seed = 1;
  std::uint32_t replications = 10;
  double ci_rel_tolerance = 0.0;  // 0 disables the convergence check
  bool record_packets = false;    // fill SimTrace packet records
  std::ostream* event_log = nullptr;  // TSV event dump (time, kind, packet, state)
};

// Packet-level record of one replication, for trace-driven tests.
struct SimTrace {
  std::vector<Packet> packets;
  SimCounters counters;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kNoPacket = static_cast<std::uint64_t>(-1);

// Two-sided 97.5% Student-t quantiles for dof 1..30; normal beyond.
inline double student_t_975(std::uint64_t dof) {
  static constexpr double table[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::quiet_NaN();
  return dof <= 30 ? table[dof - 1] : 1.96;
}

inline void sim_check(const SimConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("simulate: replications must be >= 1");
  if (cfg.target_deliveries == 0 && !(cfg.horizon_time > 0.0))
    throw std::invalid_argument("simulate: need a delivery target or a time horizon");
  if (!(cfg.warmup_fraction >= 0.0) || cfg.warmup_fraction >= 1.0)
    throw std::invalid_argument("simulate: warmup fraction must be in [0, 1)");
  if (cfg.target_deliveries == 0 && cfg.warmup_time >= cfg.horizon_time)
    throw std::invalid_argument("simulate: warmup must end before the horizon");
}

struct RepStats {
  double avg_aoi = 0.0;
  double avg_peak_aoi = 0.0;
  double t_off = 0.0, t_idle = 0.0, t_busy = 0.0;
  double sum_cycle = 0.0;
  std::uint64_t n_cycle = 0;
  double sum_xt = 0.0, sum_x2 = 0.0;
  std::uint64_t n_xt = 0;
  SimCounters counters;
};

// One replication.  Randomness comes exclusively from `src`
// (next_interarrival / next_compute / next_service), so injected
// deterministic samples exercise exact hand-computable traces.
template <class Sources>
RepStats run_replication(const SystemParams& p, const SimConfig& cfg,
                         Sources& src, std::vector<Packet>* packets) {
  const bool original = cfg.variant == SimVariant::original;
  const bool by_count = cfg.target_deliveries > 0;
  const std::uint64_t warm_del =
      by_count ? static_cast<std::uint64_t>(
                     std::llround(cfg.warmup_fraction * static_cast<double>(cfg.target_deliveries)))
               : 0;
  const std::uint64_t total_del = cfg.target_deliveries + warm_del;
  const double warm_time =
      by_count ? 0.0
               : (cfg.warmup_time >= 0.0 ? cfg.warmup_time
                                         : cfg.warmup_fraction * cfg.horizon_time);

  // Compute server: starts ON-Idle at t = 0.
  enum { OFF = 0, IDLE = 1, BUSY = 2 };
  int cstate = IDLE;
  double cend = kInf;
  double t = 0.0;
  double next_arr = src.next_interarrival();

  double gen_busy = 0.0, x_busy = 0.0;
  std::uint64_t idx_busy = kNoPacket;
  bool has_prev_admit = false;
  double prev_admit = 0.0;

  // Transmission server.
  bool sbusy = false;
  double send = kInf;
  double sgen = 0.0;
  std::uint64_t idx_serving = kNoPacket;

  // Original variant: at most one sitting packet plus its discard deadline.
  bool hv_sit = false;
  double sit_gen = 0.0, sit_enter = 0.0;
  std::uint64_t idx_sit = kNoPacket;
  double ddl = kInf;

  // Equivalent variant: accumulated waiters and the batch in service,
  // both kept in admission order (so .back() is the freshest).
  struct Entry {
    double gen, x;
    std::uint64_t idx;
  };
  std::vector<Entry> waiting, batch;
  double last_enter = 0.0;

  // Receiver timestamp and measurement accumulators.
  double u = 0.0;
  bool has_delivery = false;
  bool warm_done = (by_count && warm_del == 0) || (!by_count && warm_time <= 0.0);
  double t_warm = 0.0, t_last = 0.0, t_prev_ev = 0.0;
  double area = 0.0, peak_sum = 0.0;
  std::uint64_t n_peaks = 0, n_del = 0;
  double t_end = 0.0;

  RepStats st;
  SimCounters& c = st.counters;

  auto log_event = [&](double when, const char* kind, std::uint64_t pkt) {
    if (!cfg.event_log) return;
    char buf[128];
    const char* state = cstate == OFF ? "OFF" : (cstate == IDLE ? "ON-Idle" : "ON-Busy");
    long long id = pkt == kNoPacket ? -1 : static_cast<long long>(pkt);
    std::snprintf(buf, sizeof(buf), "%.9f\t%s\t%lld\t%s\n", when, kind, id, state);
    *cfg.event_log << buf;
  };

  auto warm_flip = [&]() {
    if (warm_done) return;
    if (by_count ? (n_del >= warm_del) : (t >= warm_time)) {
      warm_done = true;
      t_warm = t;
      t_last = t;
    }
  };

  auto record_age_reset = [&](double fresh_gen) {
    if (warm_done) {
      peak_sum += t - u;
      ++n_peaks;
      const double dt = t - t_last;
      area += dt * (t_last - u) + 0.5 * dt * dt;
      t_last = t;
    }
    if (has_delivery && !(fresh_gen > u)) ++c.n_invariant_violations;
    u = fresh_gen;
    has_delivery = true;
  };

  auto start_service = [&](double gen, std::uint64_t idx) {
    sbusy = true;
    sgen = gen;
    idx_serving = idx;
    send = t + src.next_service();
    if (packets && idx != kNoPacket) (*packets)[idx].t_service_start = t;
  };

  for (;;) {
    double times[5] = {ddl, cstate == BUSY ? cend : kInf, send,
                       cstate == OFF ? cend : kInf, next_arr};
    int ev = 0;
    double te = times[0];
    for (int i = 1; i < 5; ++i)
      if (times[i] < te) {
        te = times[i];
        ev = i;
      }

    if (!by_count && te > cfg.horizon_time) {
      t_end = cfg.horizon_time;
      if (warm_done) {
        const double dt = t_end - t_last;
        area += dt * (t_last - u) + 0.5 * dt * dt;
        double* bucket = cstate == OFF ? &st.t_off : (cstate == IDLE ? &st.t_idle : &st.t_busy);
        *bucket += t_end - t_prev_ev;
      }
      break;
    }

    if (warm_done) {
      double* bucket = cstate == OFF ? &st.t_off : (cstate == IDLE ? &st.t_idle : &st.t_busy);
      *bucket += te - t_prev_ev;
    }
    t = te;
    t_prev_ev = te;

    switch (ev) {
      case 0: {  // deadline discard (original only)
        ++c.n_discarded_deadline;
        if (std::abs((t - sit_enter) - p.tau) > 1e-9 * (1.0 + p.tau))
          ++c.n_invariant_violations;
        if (packets && idx_sit != kNoPacket)
          (*packets)[idx_sit].fate = PacketFate::discarded_deadline;
        log_event(t, "discard_deadline", idx_sit);
        hv_sit = false;
        idx_sit = kNoPacket;
        ddl = kInf;
        break;
      }
      case 1: {  // compute finishes: packet emitted into the transmission stage
        ++c.n_emitted;
        if (packets && idx_busy != kNoPacket)
          (*packets)[idx_busy].t_buffer_enter = t;
        if (sbusy) {
          ++c.n_found_busy;
          if (original) {
            if (hv_sit) {
              ++c.n_discarded_replaced;
              if (packets && idx_sit != kNoPacket)
                (*packets)[idx_sit].fate = PacketFate::discarded_replaced;
              log_event(t, "discard_replaced", idx_sit);
            }
            hv_sit = true;
            sit_gen = gen_busy;
            sit_enter = t;
            idx_sit = idx_busy;
            ddl = t + p.tau;
          } else {
            waiting.push_back({gen_busy, x_busy, idx_busy});
            last_enter = t;
          }
        } else {
          if (original) {
            start_service(gen_busy, idx_busy);
          } else {
            batch.swap(waiting);
            waiting.clear();
            batch.push_back({gen_busy, x_busy, idx_busy});
            start_service(gen_busy, idx_busy);
            if (packets)
              for (const Entry& e : batch)
                if (e.idx != kNoPacket) (*packets)[e.idx].t_service_start = t;
          }
        }
        cstate = OFF;
        cend = t + p.T_o;
        log_event(t, "emit", idx_busy);
        idx_busy = kNoPacket;
        break;
      }
      case 2: {  // service completion: delivery
        if (original) {
          record_age_reset(sgen);
          ++n_del;
          ++c.n_delivered;
          if (packets && idx_serving != kNoPacket) {
            (*packets)[idx_serving].t_delivered = t;
            (*packets)[idx_serving].fate = PacketFate::delivered;
          }
          log_event(t, "deliver", idx_serving);
          warm_flip();
          if (hv_sit) {
            if (t - sit_enter > p.tau * (1.0 + 1e-12) + 1e-12)
              ++c.n_invariant_violations;
            const double g = sit_gen;
            const std::uint64_t ix = idx_sit;
            hv_sit = false;
            idx_sit = kNoPacket;
            ddl = kInf;
            start_service(g, ix);
          } else {
            sbusy = false;
            idx_serving = kNoPacket;
            send = kInf;
          }
        } else {
          record_age_reset(batch.back().gen);
          n_del += batch.size();
          c.n_delivered += batch.size();
          for (const Entry& e : batch) {
            if (warm_done && !std::isnan(e.x)) {
              st.sum_xt += e.x * (t - e.gen);
              st.sum_x2 += e.x * e.x;
              ++st.n_xt;
            }
            if (packets && e.idx != kNoPacket) {
              (*packets)[e.idx].t_delivered = t;
              (*packets)[e.idx].fate = PacketFate::delivered;
            }
            log_event(t, "deliver", e.idx);
          }
          batch.clear();
          warm_flip();
          if (!waiting.empty() && t - last_enter <= p.tau) {
            batch.swap(waiting);
            waiting.clear();
            start_service(batch.back().gen, batch.back().idx);
            if (packets)
              for (const Entry& e : batch)
                if (e.idx != kNoPacket) (*packets)[e.idx].t_service_start = t;
          } else {
            sbusy = false;
            idx_serving = kNoPacket;
            send = kInf;
          }
        }
        if (by_count && n_del >= total_del) {
          t_end = t;
          goto done;
        }
        break;
      }
      case 3: {  // OFF dwell ends
        cstate = IDLE;
        cend = kInf;
        log_event(t, "off_end", kNoPacket);
        break;
      }
      default: {  // arrival
        if (cstate == IDLE) {
          ++c.n_admitted;
          x_busy = has_prev_admit ? t - prev_admit
                                  : std::numeric_limits<double>::quiet_NaN();
          if (warm_done && has_prev_admit) {
            st.sum_cycle += t - prev_admit;
            ++st.n_cycle;
          }
          prev_admit = t;
          has_prev_admit = true;
          gen_busy = t;
          cstate = BUSY;
          cend = t + src.next_compute();
          if (packets) {
            idx_busy = packets->size();
            packets->push_back(Packet{idx_busy, t, {}, {}, {}, PacketFate::in_flight});
          }
          log_event(t, "admit", idx_busy);
        } else {
          ++c.n_blocked_at_compute;
          log_event(t, "blocked", kNoPacket);
        }
        next_arr = t + src.next_interarrival();
        break;
      }
    }
  }
done:

  c.n_in_flight = (cstate == BUSY ? 1 : 0);
  if (original) {
    c.n_in_flight += (hv_sit ? 1 : 0) + (sbusy ? 1 : 0);
  } else {
    c.n_in_flight += waiting.size() + batch.size();
  }

  if (!warm_done) t_warm = t_end;  // never left warmup: no measurement window
  const double span = t_end - t_warm;
  st.avg_aoi = span > 0.0 ? area / span : std::numeric_limits<double>::quiet_NaN();
  st.avg_peak_aoi =
      n_peaks > 0 ? peak_sum / static_cast<double>(n_peaks)
                  : std::numeric_limits<double>::quiet_NaN();
  return st;
}

// Random streams, one per stochastic source, all derived from a replication
// seed so parameter studies sharing a master seed share randomness.
template <ComputeTimeModel D>
struct RandomSources {
  std::mt19937_64 arrivals, compute, service;
  std::exponential_distribution<double> inter;
  std::exponential_distribution<double> srv;
  const D* dist;

  RandomSources(const SystemParams& p, const D& d, double mu, std::uint64_t rep_seed)
      : arrivals(mix(rep_seed, 1)), compute(mix(rep_seed, 2)),
        service(mix(rep_seed, 3)), inter(p.lambda), srv(mu), dist(&d) {}

  double next_interarrival() { return inter(arrivals); }
  double next_compute() { return dist->sample(compute); }
  double next_service() { return srv(service); }

  static std::uint64_t mix(std::uint64_t x, std::uint64_t stream) {
    x += 0x9E3779B97F4A7C15ULL * (stream + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
};

struct RepAccumulator {
  std::vector<double> aoi, peak, power;
  double t_off = 0, t_idle = 0, t_busy = 0;
  double sum_cycle = 0, sum_xt = 0, sum_x2 = 0;
  std::uint64_t n_cycle = 0, n_xt = 0;
  SimCounters counters;

  void add(const RepStats& st, double p_c) {
    aoi.push_back(st.avg_aoi);
    peak.push_back(st.avg_peak_aoi);
    const double tot = st.t_off + st.t_idle + st.t_busy;
    power.push_back(tot > 0 ? (st.t_idle + p_c * st.t_busy) / tot : 0.0);
    t_off += st.t_off;
    t_idle += st.t_idle;
    t_busy += st.t_busy;
    sum_cycle += st.sum_cycle;
    n_cycle += st.n_cycle;
    sum_xt += st.sum_xt;
    sum_x2 += st.sum_x2;
    n_xt += st.n_xt;
    counters.add(st.counters);
  }

  static std::pair<double, double> mean_hw(const std::vector<double>& v) {
    const std::uint64_t n = v.size();
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    if (n < 2) return {m, std::numeric_limits<double>::quiet_NaN()};
    double s2 = 0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(n - 1);
    return {m, student_t_975(n - 1) * std::sqrt(s2 / static_cast<double>(n))};
  }

  SimEstimate finish(const SimConfig& cfg, double p_c, bool equivalent) const {
    SimEstimate e;
    auto [am, ah] = mean_hw(aoi);
    auto [pm, ph] = mean_hw(peak);
    auto [wm, wh] = mean_hw(power);
    (void)wm;
    e.avg_aoi = am;
    e.avg_aoi_hw = ah;
    e.avg_peak_aoi = pm;
    e.avg_peak_aoi_hw = ph;
    const double tot = t_off + t_idle + t_busy;
    if (tot > 0) {
      e.occ_off = t_off / tot;
      e.occ_idle = t_idle / tot;
      e.occ_busy = t_busy / tot;
    }
    e.measured_power = e.occ_idle * 1.0 + e.occ_busy * p_c;
    e.measured_power_hw = wh;
    e.mean_cycle = n_cycle > 0 ? sum_cycle / static_cast<double>(n_cycle)
                               : std::numeric_limits<double>::quiet_NaN();
    if (equivalent && n_xt > 0) {
      e.mean_xt = sum_xt / static_cast<double>(n_xt);
      e.mean_x2 = sum_x2 / static_cast<double>(n_xt);
    }
    e.counters = counters;
    e.replications = cfg.replications;
    e.ci_ok = true;
    if (cfg.ci_rel_tolerance > 0.0) {
      e.ci_ok = aoi.size() >= 2 && std::isfinite(ah) && std::isfinite(ph) &&
                ah <= cfg.ci_rel_tolerance * std::abs(am) &&
                ph <= cfg.ci_rel_tolerance * std::abs(pm);
    }
    return e;
  }
};

}  // namespace detail

// Runs cfg.replications independent replications, drawing randomness from
// user-supplied sources: make_sources(rep) must return an object with
// next_interarrival / next_compute / next_service.
template <class SourceFactory>
SimEstimate run_with_sources(const SystemParams& p, const SimConfig& cfg,
                             SourceFactory&& make_sources,
                             SimTrace* trace = nullptr) {
  detail::sim_check(cfg);
  if (auto issues = param_issues(p); !issues.empty())
    throw std::invalid_argument("simulate: " + issues.front());
  detail::RepAccumulator acc;
  for (std::uint32_t rep = 0; rep < cfg.replications; ++rep) {
    auto src = make_sources(rep);
    std::vector<Packet> packets;
    const bool record = (cfg.record_packets || trace) && rep == 0;
    auto st = detail::run_replication(p, cfg, src, record ? &packets : nullptr);
    if (record && trace) {
      trace->packets = std::move(packets);
      trace->counters = st.counters;
    }
    acc.add(st, p.p_c);
  }
  return acc.finish(cfg, p.p_c, cfg.variant == SimVariant::equivalent);
}

template <ComputeTimeModel D>
SimEstimate run(const SystemParams& p, const D& compute,
                const CouplingModel& coupling, const SimConfig& cfg) {
  const double mu = transmission_rate(coupling, compute.mean());
  return run_with_sources(p, cfg, [&](std::uint32_t rep) {
    const std::uint64_t rep_seed =
        detail::RandomSources<D>::mix(cfg.seed, 0x5111D + rep);
    return detail::RandomSources<D>(p, compute, mu, rep_seed);
  });
}

template <ComputeTimeModel D>
std::pair<SimEstimate, SimTrace> run_traced(const SystemParams& p,
                                            const D& compute,
                                            const CouplingModel& coupling,
                                            const SimConfig& cfg) {
  const double mu = transmission_rate(coupling, compute.mean());
  SimTrace trace;
  SimEstimate est = run_with_sources(
      p, cfg,
      [&](std::uint32_t rep) {
        const std::uint64_t rep_seed =
            detail::RandomSources<D>::mix(cfg.seed, 0x5111D + rep);
        return detail::RandomSources<D>(p, compute, mu, rep_seed);
      },
      &trace);
  return {est, trace};
}

// Empirical counterpart of the stationary busy probability: the fraction of
// emitted packets that found the transmission server mid-service.
inline std::optional<double> measure_busy_found_fraction(const SimTrace& trace) {
  if (trace.counters.n_emitted == 0) return std::nullopt;
  return static_cast<double>(trace.counters.n_found_busy) /
         static_cast<double>(trace.counters.n_emitted);
}

struct VariantComparison {
  SimEstimate original;
  SimEstimate equivalent;
  double rel_gap_aoi = 0.0;
  double rel_gap_peak = 0.0;
  bool ci_overlap_aoi = false;
  bool ci_overlap_peak = false;
  bool pass = false;
};

// Runs both variants with independent streams derived from the same master
// seed; passes when, for each metric, the replication CIs overlap or the
// relative gap stays below 1%.
template <ComputeTimeModel D>
VariantComparison compare_variants(const SystemParams& p, const D& compute,
                                   const CouplingModel& coupling,
                                   const SimConfig& cfg) {
  SimConfig co = cfg;
  co.variant = SimVariant::original;
  co.seed = detail::RandomSources<D>::mix(cfg.seed, 0x0417);
  SimConfig ce = cfg;
  ce.variant = SimVariant::equivalent;
  ce.seed = detail::RandomSources<D>::mix(cfg.seed, 0xE417);

  VariantComparison r;
  r.original = run(p, compute, coupling, co);
  r.equivalent = run(p, compute, coupling, ce);
  const auto gap = [](double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
  };
  r.rel_gap_aoi = gap(r.original.avg_aoi, r.equivalent.avg_aoi);
  r.rel_gap_peak = gap(r.original.avg_peak_aoi, r.equivalent.avg_peak_aoi);
  const auto overlap = [](double m1, double h1, double m2, double h2) {
    if (!std::isfinite(h1) || !std::isfinite(h2)) return false;
    return std::abs(m1 - m2) <= h1 + h2;
  };
  r.ci_overlap_aoi = overlap(r.original.avg_aoi, r.original.avg_aoi_hw,
                             r.equivalent.avg_aoi, r.equivalent.avg_aoi_hw);
  r.ci_overlap_peak =
      overlap(r.original.avg_peak_aoi, r.original.avg_peak_aoi_hw,
              r.equivalent.avg_peak_aoi, r.equivalent.avg_peak_aoi_hw);
  r.pass = (r.ci_overlap_aoi || r.rel_gap_aoi < 0.01) &&
           (r.ci_overlap_peak || r.rel_gap_peak < 0.01);
  return r;
}

}  // namespace aoi
