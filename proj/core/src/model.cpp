#include "cmrkit/model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace cmrkit {

namespace {
void require_positive(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("power law evaluated at non-positive x");
  }
}
}  // namespace

double evaluate(const PowerLaw1& law, double x) {
  require_positive(x);
  return law.alpha * std::pow(x, law.s) + law.beta;
}

double evaluate(const PowerLaw2& law, double x) {
  require_positive(x);
  return law.alpha2 * std::pow(x, law.s2) + law.alpha3 * std::pow(x, law.s3) +
         law.beta2;
}

PowerLaw2 canonicalize(const PowerLaw2& law) {
  PowerLaw2 out = law;
  if (out.s2 > out.s3) {
    std::swap(out.alpha2, out.alpha3);
    std::swap(out.s2, out.s3);
  }
  return out;
}

}  // namespace cmrkit
