#include "ifmix/mixer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ifmix {

void BetaParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    std::ostringstream msg;
    msg << "Beta parameters must be positive, got (" << alpha << ", " << beta << ")";
    throw std::invalid_argument(msg.str());
  }
}

std::string BetaParams::label() const {
  std::ostringstream os;
  os << "Beta(" << alpha << ";" << beta << ")";
  return os.str();
}

double sample_lambda(const BetaParams& params, Rng& rng) {
  params.validate();
  for (;;) {
    const double x = rng.gamma(params.alpha);
    const double y = rng.gamma(params.beta);
    if (x + y == 0.0) continue;
    const double lambda = x / (x + y);
    if (lambda > 0.0 && lambda < 1.0) return lambda;
  }
}

double beta_pdf(const BetaParams& params, double x) {
  params.validate();
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << "beta_pdf: x = " << x << " outside [0, 1]";
    throw std::domain_error(msg.str());
  }
  const double a = params.alpha;
  const double b = params.beta;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) * std::exp(log_norm);
}

Graph mix_pair(const Graph& a, const Graph& b, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    std::ostringstream msg;
    msg << "mixing ratio " << lambda << " outside (0, 1)";
    throw std::invalid_argument(msg.str());
  }
  auto [pa, pb] = pad_pair(a, b);
  Graph out;
  out.weights = interpolate(pa.weights, pb.weights, lambda);
  out.features = interpolate(pa.features, pb.features, lambda);
  return out;
}

LabelDistribution mix_labels(const LabelDistribution& a, const LabelDistribution& b, double lambda) {
  if (a.num_classes() != b.num_classes()) {
    throw std::invalid_argument("label dimension mismatch: " + std::to_string(a.num_classes()) +
                                " vs " + std::to_string(b.num_classes()));
  }
  return LabelDistribution(interpolate(a.p, b.p, lambda));
}

MixedSample mix_samples(const GraphDataset& ds, std::size_t i, std::size_t j, double lambda) {
  MixedSample out;
  out.graph = mix_pair(ds.graph(i), ds.graph(j), lambda);
  out.label = mix_labels(ds.label(i), ds.label(j), lambda);
  out.lambda = lambda;
  out.source_ids = {i, j};
  return out;
}

} // namespace ifmix
