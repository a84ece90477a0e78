#include "ami/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ami/linalg/gemm.hpp"
#include "ami/nn/attention.hpp"
#include "ami/nn/fc.hpp"

namespace ami {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

double rel_err(double analytic, double fd) { return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)); }

template <class Loss>
double central(double& slot, double h, Loss loss) {
  const double keep = slot;
  slot = keep + h;
  const double up = loss();
  slot = keep - h;
  const double down = loss();
  slot = keep;
  return (up - down) / (2.0 * h);
}

}  // namespace

GradCheck fc_gradcheck(Rng& rng, double h, double margin) {
  GradCheck out;
  for (;;) {
    const std::size_t d = 2 + rng.below(5), n = 1 + rng.below(6);
    Matrix W1 = random_matrix(2 * d, d, rng);
    Matrix b1 = random_matrix(1, 2 * d, rng);
    Matrix w2 = random_matrix(1, 2 * d, rng);
    double b2 = rng.normal();
    Matrix X = random_matrix(n, d, rng);

    bool near_kink = false;
    std::size_t active = 0;
    for (std::size_t s = 0; s < n; ++s) {
      double a = b2;
      for (std::size_t r = 0; r < 2 * d; ++r) {
        double pre = b1(0, r);
        for (std::size_t c = 0; c < d; ++c) pre += W1(r, c) * X(s, c);
        near_kink |= std::abs(pre) < margin;
        if (pre > 0) a += w2(0, r) * pre;
      }
      near_kink |= std::abs(a) < margin;
      active += a > 0;
    }
    if (near_kink || active == 0) {
      ++out.redraws;
      continue;
    }
    out.active_units = active;

    auto build = [&] {
      return fc_params_from_dense(W1, {b1.data(), b1.data() + 2 * d}, {w2.data(), w2.data() + 2 * d}, b2);
    };
    GradientReport g = fc_backward(build(), X.view(), GradScope::All);
    auto loss = [&] { return fc_loss(build(), X.view()); };

    out.max_rel_error = std::max(out.max_rel_error, rel_err(g.at("b_2_1")(0, 0), central(b2, h, loss)));
    ++out.entries;
    for (std::size_t r = 0; r < 2 * d; ++r) {
      out.max_rel_error = std::max(out.max_rel_error, rel_err(g.at("b_1")(0, r), central(b1(0, r), h, loss)));
      out.max_rel_error = std::max(out.max_rel_error, rel_err(g.at("W_2_row")(0, r), central(w2(0, r), h, loss)));
      out.entries += 2;
      for (std::size_t c = 0; c < d; ++c) {
        out.max_rel_error = std::max(out.max_rel_error, rel_err(g.at("W_1")(r, c), central(W1(r, c), h, loss)));
        ++out.entries;
      }
    }
    return out;
  }
}

GradCheck attn_gradcheck(Rng& rng, double h, double margin) {
  GradCheck out;
  for (;;) {
    const std::size_t d = 2 + rng.below(4), l = 1 + rng.below(4), n = 1 + rng.below(3);
    AttnParams p;
    p.d_X = d;
    p.d_attn = d - 1;
    p.d_hid = d;
    p.d_Y = 2 * d;
    for (AttnHead& hd : p.heads) {
      hd.W_Q = std::make_shared<const Matrix>(random_matrix(d - 1, d, rng));
      hd.W_K = std::make_shared<const Matrix>(random_matrix(d - 1, d, rng));
      hd.W_V = std::make_shared<const Matrix>(random_matrix(d, d, rng));
    }
    p.W_O = random_matrix(2 * d, 4 * d, rng, 0.5);
    Matrix bO = random_matrix(1, 2 * d, rng);
    p.b_O.assign(bO.data(), bO.data() + 2 * d);
    std::vector<Matrix> batch;
    for (std::size_t s = 0; s < n; ++s) batch.push_back(random_matrix(d, l, rng));

    // Pre-activations rebuilt from the head outputs, which do not depend on W_O.
    bool near_kink = false;
    std::size_t active = 0;
    for (const Matrix& X : batch) {
      std::array<Matrix, kHeads> Z = attn_head_outputs(p, X);
      for (std::size_t i = 0; i < p.d_Y; ++i)
        for (std::size_t t = 0; t < l; ++t) {
          double pre = p.b_O[i];
          for (std::size_t hh = 0; hh < kHeads; ++hh)
            for (std::size_t j = 0; j < d; ++j) pre += p.W_O(i, hh * d + j) * Z[hh](j, t);
          near_kink |= std::abs(pre) < margin;
          active += pre > 0;
        }
    }
    if (near_kink || active == 0) {
      ++out.redraws;
      continue;
    }
    out.active_units = active;
    GradientReport g = attn_backward(p, batch);
    const Matrix& gw = g.at("W_O");
    for (std::size_t i = 0; i < p.W_O.rows(); ++i)
      for (std::size_t j = 0; j < p.W_O.cols(); ++j) {
        double fd = central(p.W_O(i, j), h, [&] { return attn_loss(p, batch); });
        out.max_rel_error = std::max(out.max_rel_error, rel_err(gw(i, j), fd));
        ++out.entries;
      }
    return out;
  }
}

}  // namespace ami
