#include <hdqkd/security.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace hdqkd {

namespace {

using Counts = Eigen::Matrix<std::int64_t, 8, 8>;

void crosstalk_trial(const Bench& bench, int prepared, std::uint64_t seed, std::uint64_t stream_id, Counts& counts) {
  RandomStream rng(seed, stream_id);
  const StateXd s =
      perturb(bench.modes[static_cast<std::size_t>(prepared)], bench.settings.imperfections, rng);
  const MeasurementOutcome v = analyse_with_model(bench, s, MubBasis::vector, rng);
  const MeasurementOutcome sc = analyse_with_model(bench, s, MubBasis::scalar, rng);
  ++counts(prepared, *v.bits);
  ++counts(prepared, 4 + *sc.bits);
}

}  // namespace

CrosstalkMatrix estimate_crosstalk(const Bench& bench, std::int64_t trials_per_mode, std::uint64_t seed,
                                   int threads) {
  if (trials_per_mode <= 0) {
    throw std::invalid_argument("trials_per_mode must be positive");
  }
  const std::uint64_t trials = static_cast<std::uint64_t>(trials_per_mode);
  const std::uint64_t total = 8 * trials;
  const int workers = std::max(1, std::min(threads, 256));

  std::vector<Counts> partial(static_cast<std::size_t>(workers), Counts::Zero());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const std::uint64_t block = (total + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);

  auto worker_fn = [&](int w) {
    const std::uint64_t lo = static_cast<std::uint64_t>(w) * block;
    const std::uint64_t hi = std::min(total, lo + block);
    try {
      for (std::uint64_t u = lo; u < hi; ++u) {
        const int prepared = static_cast<int>(u / trials);
        crosstalk_trial(bench, prepared, seed, u, partial[static_cast<std::size_t>(w)]);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };

  if (workers == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  Counts counts = Counts::Zero();
  for (const auto& part : partial) counts += part;

  CrosstalkMatrix m;
  m.subspace_l = bench.settings.subspace_l;
  m.trials_per_mode = trials_per_mode;
  const double n = static_cast<double>(trials_per_mode);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double p = static_cast<double>(counts(i, j)) / n;
      m.p(i, j) = p;
      m.se(i, j) = std::sqrt(p * (1.0 - p) / n);
    }
  }
  return m;
}

CrosstalkMatrix born_crosstalk(const Bench& bench) {
  CrosstalkMatrix m;
  m.subspace_l = bench.settings.subspace_l;
  m.trials_per_mode = 0;
  for (int i = 0; i < 8; ++i) {
    const StateXd& s = bench.modes[static_cast<std::size_t>(i)];
    const auto pv = port_distribution(bench.vector_analyser, bench.vector_projectors, s);
    const auto ps = port_distribution(bench.scalar_analyser, bench.scalar_projectors, s);
    for (int k = 0; k < 4; ++k) {
      const DetectorPort vport = analyser_ports(MubBasis::vector)[static_cast<std::size_t>(k)];
      const DetectorPort sport = analyser_ports(MubBasis::scalar)[static_cast<std::size_t>(k)];
      m.p(i, bench.ports.bits_for(vport)) += pv[static_cast<std::size_t>(k)];
      m.p(i, 4 + bench.ports.bits_for(sport)) += ps[static_cast<std::size_t>(k)];
    }
  }
  return m;
}

double fidelity_from_matrix(const CrosstalkMatrix& m) { return m.p.diagonal().mean(); }

const char* to_string(InfoVariant v) { return v == InfoVariant::spread_all ? "spread-all" : "spread-others"; }

InfoVariant parse_info_variant(const std::string& name) {
  if (name == "spread-all") return InfoVariant::spread_all;
  if (name == "spread-others") return InfoVariant::spread_others;
  throw std::invalid_argument("unknown info variant '" + name + "'");
}

namespace {

// w * log2(ratio) with the 0 * log 0 limit.
double wlog2(double w, double ratio) { return w <= 0.0 ? 0.0 : w * std::log2(ratio); }

void require_dimension(int d) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
}

void require_unit(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  }
}

}  // namespace

double mutual_info_ab(double fidelity, int dimension, InfoVariant variant) {
  require_dimension(dimension);
  require_unit(fidelity, "fidelity");
  const double d = dimension;
  const double miss = 1.0 - fidelity;
  const double denom = variant == InfoVariant::spread_all ? d : d - 1.0;
  return std::log2(d) + wlog2(fidelity, fidelity) + wlog2(miss, miss / denom);
}

double cloning_fidelity(double fidelity, int dimension) {
  require_dimension(dimension);
  require_unit(fidelity, "fidelity");
  const double d = dimension;
  const double miss = 1.0 - fidelity;
  return fidelity / d + (d - 1.0) * miss / d + 2.0 * std::sqrt((d - 1.0) * fidelity * miss) / d;
}

double mutual_info_ae(double fidelity, double eve_fidelity, int dimension) {
  require_dimension(dimension);
  require_unit(fidelity, "fidelity");
  require_unit(eve_fidelity, "cloning fidelity");
  const double d = dimension;
  const double joint = fidelity + eve_fidelity - 1.0;
  if (joint < 0.0) {
    throw std::domain_error("fidelity pair is outside the cloning trade-off region");
  }
  if (fidelity <= 0.0) {
    throw std::domain_error("zero sift fidelity has no defined leak estimate");
  }
  return std::log2(d) + wlog2(joint, joint / fidelity) +
         wlog2(1.0 - eve_fidelity, (1.0 - eve_fidelity) / ((d - 1.0) * fidelity));
}

KeyRate secret_key_rate(double info_ab, double info_ae) {
  const double raw = info_ab - info_ae;
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

double qber_security_bound(int dimension) {
  switch (dimension) {
    case 2: return 0.11;
    case 4: return 0.18;
    default: throw std::invalid_argument("no tabulated bound for dimension " + std::to_string(dimension));
  }
}

SecurityMetrics metrics_from_fidelity(double fidelity, int dimension, InfoVariant variant) {
  SecurityMetrics m;
  m.fidelity = fidelity;
  m.qber = 1.0 - fidelity;
  m.mutual_info_ab = mutual_info_ab(fidelity, dimension, variant);
  m.cloning_fidelity = cloning_fidelity(fidelity, dimension);
  m.mutual_info_ae = mutual_info_ae(fidelity, m.cloning_fidelity, dimension);
  const KeyRate rate = secret_key_rate(m.mutual_info_ab, m.mutual_info_ae);
  m.key_rate = rate.rate;
  m.clamped = rate.clamped;
  m.capacity_per_dimension = rate.rate / static_cast<double>(dimension);
  return m;
}

SecurityReport build_report(const CrosstalkMatrix& matrix, InfoVariant variant, int dimension) {
  SecurityReport r;
  r.matrix = matrix;
  r.variant = variant;
  r.dimension = dimension;
  r.measured = metrics_from_fidelity(fidelity_from_matrix(matrix), r.dimension, variant);
  r.ideal = metrics_from_fidelity(1.0, r.dimension, variant);
  r.qber_bound = qber_security_bound(r.dimension);
  r.secure = r.measured.qber < r.qber_bound;
  return r;
}

}  // namespace hdqkd
