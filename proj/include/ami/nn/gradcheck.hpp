#pragma once

#include "ami/core/rng.hpp"

namespace ami {

struct GradCheck {
  double max_rel_error = 0.0;  // |analytic - fd| / max(1, |analytic|)
  std::size_t entries = 0;
  std::size_t active_units = 0;
  int redraws = 0;  // configurations rejected for lying near a ReLU kink
};

// Draws a random layer and batch, redrawing until every ReLU pre-activation
// is at least `margin` away from 0, then compares the analytic gradient of
// every parameter with a central difference of step h.
GradCheck fc_gradcheck(Rng& rng, double h = 1e-5, double margin = 1e-3);
// Same for the attention layer, over every W_O entry.
GradCheck attn_gradcheck(Rng& rng, double h = 1e-5, double margin = 1e-3);

}  // namespace ami
