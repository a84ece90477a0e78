#include "ami/nn/gradient.hpp"

#include "ami/core/error.hpp"

namespace ami {

const Matrix& GradientReport::at(const std::string& name) const {
  auto it = grads.find(name);
  if (it == grads.end()) throw ContractError("gradient report has no entry '" + name + "'");
  return it->second;
}

void GradientReport::rescore() {
  score = 0.0;
  for (const std::string& name : monitored) score = std::max(score, max_abs(at(name).view()));
}

}  // namespace ami
