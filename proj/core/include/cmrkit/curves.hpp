#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmrkit {

// Training volume is stored in dimensionless units; one unit is
// tokens_per_unit raw tokens (default 0.2e9, so t=100 is 20B tokens).
inline constexpr double kDefaultTokensPerUnit = 0.2e9;

struct LossSample {
  double t = 0.0;     // training volume, units
  double loss = 0.0;  // cross-entropy, nats
};

enum class DeltaKind { general, domain };

// One continual-pre-training run: losses sampled along the trajectory for a
// single mixture ratio, plus the pre-CPT baseline losses of the same model.
// Immutable by convention after validation.
struct TrainingCurve {
  std::string model_label;
  double ratio = 0.0;         // domain fraction of the training mix, in [0,1]
  double baseline_gen = 0.0;  // general loss at t = 0
  double baseline_dom = 0.0;  // domain loss at t = 0
  std::vector<LossSample> gen_samples;
  std::vector<LossSample> dom_samples;
};

struct DeltaSample {
  double t = 0.0;
  double delta = 0.0;  // loss at t minus the baseline
};

struct DeltaCurve {
  double ratio = 0.0;
  DeltaKind kind = DeltaKind::general;
  std::vector<DeltaSample> samples;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks every TrainingCurve invariant: ratio in [0,1], positive baselines,
// at least four samples per kind, positive losses, strictly increasing t.
// Throws ValidationError naming the violation.
void validate(const TrainingCurve& curve);

DeltaCurve to_delta(const TrainingCurve& curve, DeltaKind kind);

// Loss of the last recorded sample (end of training) for the given kind.
double end_of_training_loss(const TrainingCurve& curve, DeltaKind kind);

const std::vector<LossSample>& samples_of(const TrainingCurve& curve,
                                          DeltaKind kind);
double baseline_of(const TrainingCurve& curve, DeltaKind kind);

}  // namespace cmrkit
