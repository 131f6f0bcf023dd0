#pragma once

// Linear-chain CRF over two tags per token: 0 = inside an EDU, 1 = the
// token closes an EDU. Scores are emissions (T x 2) plus a 2 x 2 transition
// matrix; there are no start or stop scores.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "unirst/autodiff.hpp"
#include "unirst/document.hpp"

namespace unirst {

inline constexpr int kTagInside = 0;
inline constexpr int kTagBoundary = 1;
inline constexpr int kNumTags = 2;

namespace crf_detail {

inline double lse2(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// alpha[t][y]: log-sum of all prefixes ending in y at t.
inline std::vector<std::array<double, 2>> forward(const Matrix& em, const Matrix& tr) {
  const int T = em.rows;
  std::vector<std::array<double, 2>> a(static_cast<std::size_t>(T));
  for (int y = 0; y < 2; ++y) a[0][static_cast<std::size_t>(y)] = em(0, y);
  for (int t = 1; t < T; ++t)
    for (int y = 0; y < 2; ++y)
      a[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] =
          em(t, y) + lse2(a[static_cast<std::size_t>(t - 1)][0] + tr(0, y),
                          a[static_cast<std::size_t>(t - 1)][1] + tr(1, y));
  return a;
}

inline std::vector<std::array<double, 2>> backward(const Matrix& em, const Matrix& tr) {
  const int T = em.rows;
  std::vector<std::array<double, 2>> b(static_cast<std::size_t>(T), {0.0, 0.0});
  for (int t = T - 2; t >= 0; --t)
    for (int y = 0; y < 2; ++y)
      b[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] =
          lse2(tr(y, 0) + em(t + 1, 0) + b[static_cast<std::size_t>(t + 1)][0],
               tr(y, 1) + em(t + 1, 1) + b[static_cast<std::size_t>(t + 1)][1]);
  return b;
}

inline void check_shapes(const Matrix& em, const Matrix& tr) {
  if (em.rows < 1 || em.cols != kNumTags || tr.rows != kNumTags || tr.cols != kNumTags)
    throw InvariantError("crf: expected T x 2 emissions and 2 x 2 transitions");
}

}  // namespace crf_detail

inline double crf_log_partition(const Matrix& emissions, const Matrix& transitions) {
  crf_detail::check_shapes(emissions, transitions);
  const auto a = crf_detail::forward(emissions, transitions);
  return crf_detail::lse2(a.back()[0], a.back()[1]);
}

inline double crf_score(const Matrix& emissions, const Matrix& transitions,
                        const std::vector<int>& tags) {
  double s = 0;
  for (int t = 0; t < emissions.rows; ++t) {
    s += emissions(t, tags[static_cast<std::size_t>(t)]);
    if (t > 0) s += transitions(tags[static_cast<std::size_t>(t - 1)], tags[static_cast<std::size_t>(t)]);
  }
  return s;
}

// Highest-scoring tag sequence. Ties go to the lower tag at every step.
inline std::vector<int> crf_viterbi(const Matrix& emissions, const Matrix& transitions) {
  crf_detail::check_shapes(emissions, transitions);
  const int T = emissions.rows;
  std::vector<std::array<double, 2>> delta(static_cast<std::size_t>(T));
  std::vector<std::array<int, 2>> back(static_cast<std::size_t>(T), {0, 0});
  for (int y = 0; y < 2; ++y) delta[0][static_cast<std::size_t>(y)] = emissions(0, y);
  for (int t = 1; t < T; ++t)
    for (int y = 0; y < 2; ++y) {
      const double s0 = delta[static_cast<std::size_t>(t - 1)][0] + transitions(0, y);
      const double s1 = delta[static_cast<std::size_t>(t - 1)][1] + transitions(1, y);
      const int best = s1 > s0 ? 1 : 0;
      back[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] = best;
      delta[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] =
          emissions(t, y) + (best ? s1 : s0);
    }
  std::vector<int> tags(static_cast<std::size_t>(T));
  tags.back() = delta.back()[1] > delta.back()[0] ? 1 : 0;
  for (int t = T - 1; t > 0; --t)
    tags[static_cast<std::size_t>(t - 1)] =
        back[static_cast<std::size_t>(t)][static_cast<std::size_t>(tags[static_cast<std::size_t>(t)])];
  return tags;
}

// Negative log-likelihood log Z - score(tags) as a tape node. The gradient is
// the difference between expected and observed feature counts.
inline Var crf_nll(Tape& tape, Var emissions, Var transitions, const std::vector<int>& tags) {
  const Matrix& em = tape.value(emissions);
  const Matrix& tr = tape.value(transitions);
  crf_detail::check_shapes(em, tr);
  if (static_cast<int>(tags.size()) != em.rows) throw InvariantError("crf_nll: tag count mismatch");
  const double logz = crf_log_partition(em, tr);
  const double nll = logz - crf_score(em, tr, tags);
  return tape.record(Matrix(1, 1, nll), {emissions, transitions},
                     [emissions, transitions, tags, logz](Tape& t, int self) {
                       const double g = t.grad(self).data[0];
                       const Matrix& em = t.value(emissions);
                       const Matrix& tr = t.value(transitions);
                       const auto a = crf_detail::forward(em, tr);
                       const auto b = crf_detail::backward(em, tr);
                       const int T = em.rows;
                       if (t.needs_grad(emissions)) {
                         Matrix& ge = t.grad(emissions.id);
                         for (int i = 0; i < T; ++i)
                           for (int y = 0; y < 2; ++y) {
                             const double marg =
                                 std::exp(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] +
                                          b[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] - logz);
                             ge(i, y) += g * (marg - (tags[static_cast<std::size_t>(i)] == y ? 1.0 : 0.0));
                           }
                       }
                       if (t.needs_grad(transitions)) {
                         Matrix& gt = t.grad(transitions.id);
                         for (int i = 1; i < T; ++i)
                           for (int p = 0; p < 2; ++p)
                             for (int y = 0; y < 2; ++y) {
                               const double pair = std::exp(
                                   a[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(p)] + tr(p, y) +
                                   em(i, y) + b[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] - logz);
                               const double obs = tags[static_cast<std::size_t>(i - 1)] == p &&
                                                          tags[static_cast<std::size_t>(i)] == y
                                                      ? 1.0
                                                      : 0.0;
                               gt(p, y) += g * (pair - obs);
                             }
                       }
                     });
}

// Tags for a gold segmentation: 1 on the last token of every EDU.
inline std::vector<int> boundary_tags(const std::vector<Edu>& edus, int n_tokens) {
  std::vector<int> tags(static_cast<std::size_t>(n_tokens), kTagInside);
  for (const auto& e : edus) tags[static_cast<std::size_t>(e.token_end - 1)] = kTagBoundary;
  return tags;
}

// EDU table from a tag sequence; the final token always closes an EDU.
inline std::vector<Edu> edus_from_tags(const std::vector<int>& tags) {
  std::vector<int> ends;
  for (std::size_t i = 0; i + 1 < tags.size(); ++i)
    if (tags[i] == kTagBoundary) ends.push_back(static_cast<int>(i) + 1);
  ends.push_back(static_cast<int>(tags.size()));
  return edus_from_ends(ends);
}

}  // namespace unirst
