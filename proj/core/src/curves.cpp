#include "cmrkit/curves.hpp"

#include <sstream>

namespace cmrkit {

namespace {

void check_samples(const std::vector<LossSample>& samples,
                   const std::string& what, const std::string& label,
                   double ratio) {
  std::ostringstream ctx;
  ctx << "curve '" << label << "' ratio " << ratio << " " << what;
  if (samples.size() < 4) {
    throw ValidationError(ctx.str() + ": needs at least 4 samples, has " +
                          std::to_string(samples.size()));
  }
  double prev_t = 0.0;
  for (const auto& s : samples) {
    if (!(s.t > 0.0)) {
      std::ostringstream msg;
      msg << ctx.str() << ": sample t must be positive, got " << s.t;
      throw ValidationError(msg.str());
    }
    if (!(s.loss > 0.0)) {
      std::ostringstream msg;
      msg << ctx.str() << ": loss must be positive, got " << s.loss << " at t=" << s.t;
      throw ValidationError(msg.str());
    }
    if (s.t == prev_t) {
      std::ostringstream msg;
      msg << ctx.str() << ": duplicate t value " << s.t;
      throw ValidationError(msg.str());
    }
    if (s.t < prev_t) {
      std::ostringstream msg;
      msg << ctx.str() << ": non-monotone t, " << s.t << " after " << prev_t;
      throw ValidationError(msg.str());
    }
    prev_t = s.t;
  }
}

}  // namespace

void validate(const TrainingCurve& curve) {
  if (!(curve.ratio >= 0.0 && curve.ratio <= 1.0)) {
    std::ostringstream msg;
    msg << "curve '" << curve.model_label << "': ratio out of [0,1], got "
        << curve.ratio;
    throw ValidationError(msg.str());
  }
  if (!(curve.baseline_gen > 0.0) || !(curve.baseline_dom > 0.0)) {
    std::ostringstream msg;
    msg << "curve '" << curve.model_label << "' ratio " << curve.ratio
        << ": baseline losses must be positive (gen=" << curve.baseline_gen
        << ", dom=" << curve.baseline_dom << ")";
    throw ValidationError(msg.str());
  }
  check_samples(curve.gen_samples, "gen", curve.model_label, curve.ratio);
  check_samples(curve.dom_samples, "dom", curve.model_label, curve.ratio);
}

const std::vector<LossSample>& samples_of(const TrainingCurve& curve,
                                          DeltaKind kind) {
  return kind == DeltaKind::general ? curve.gen_samples : curve.dom_samples;
}

double baseline_of(const TrainingCurve& curve, DeltaKind kind) {
  return kind == DeltaKind::general ? curve.baseline_gen : curve.baseline_dom;
}

DeltaCurve to_delta(const TrainingCurve& curve, DeltaKind kind) {
  const auto& samples = samples_of(curve, kind);
  const double baseline = baseline_of(curve, kind);
  DeltaCurve out;
  out.ratio = curve.ratio;
  out.kind = kind;
  out.samples.reserve(samples.size());
  for (const auto& s : samples) {
    out.samples.push_back({s.t, s.loss - baseline});
  }
  return out;
}

double end_of_training_loss(const TrainingCurve& curve, DeltaKind kind) {
  const auto& samples = samples_of(curve, kind);
  if (samples.empty()) {
    throw ValidationError("curve has no samples");
  }
  return samples.back().loss;
}

}  // namespace cmrkit
