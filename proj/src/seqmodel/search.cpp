#include "corrbridge/seqmodel/search.hpp"

#include <algorithm>

#include "corrbridge/numerics/ops.hpp"
#include "corrbridge/numerics/tape.hpp"

namespace corrbridge {

namespace {

bool emittable(int token) { return token != kPad && token != kBos; }

// Higher score first; equal scores prefer the lexicographically smaller sequence.
bool better(double score_a, const std::vector<int>& a, double score_b, const std::vector<int>& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

template <typename T>
Hypothesis decode_greedy(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t max_len) {
  NoGradScope<T> no_grad;
  decoder.calls.bump();
  Tensor<T> h = as_single_row(rep, decoder.hidden_dim(), "decode_greedy");
  Hypothesis hyp;
  int previous = kBos;
  for (std::size_t step = 0; step < max_len; ++step) {
    h = decoder.step(h, std::span<const int>(&previous, 1));
    const auto log_probs = decoder.log_probs(h);
    auto lp = log_probs.data();
    int best = -1;
    for (int v = 0; v < static_cast<int>(lp.size()); ++v) {
      if (!emittable(v)) continue;
      if (best < 0 || lp[static_cast<std::size_t>(v)] > lp[static_cast<std::size_t>(best)]) best = v;
    }
    hyp.score += static_cast<double>(lp[static_cast<std::size_t>(best)]);
    if (best == kEos) {
      hyp.finished = true;
      break;
    }
    hyp.tokens.push_back(best);
    previous = best;
  }
  return hyp;
}

template <typename T>
Hypothesis decode_beam(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t beam_width,
                       std::size_t max_len) {
  if (beam_width < 1) throw ShapeError("decode_beam", "beam_width must be >= 1");
  NoGradScope<T> no_grad;
  decoder.calls.bump();

  struct Candidate {
    double score;
    std::size_t parent;
    int token;
  };

  std::vector<Hypothesis> running{Hypothesis{}};
  std::vector<Hypothesis> finished;
  Tensor<T> h = as_single_row(rep, decoder.hidden_dim(), "decode_beam");
  const auto vocab = static_cast<int>(decoder.vocab_size());

  for (std::size_t step = 0; step < max_len && !running.empty(); ++step) {
    std::vector<int> previous;
    for (const auto& hyp : running) previous.push_back(hyp.tokens.empty() ? kBos : hyp.tokens.back());
    h = decoder.step(h, previous);
    const auto log_probs = decoder.log_probs(h);
    auto lp = log_probs.data();

    std::vector<Candidate> candidates;
    candidates.reserve(running.size() * static_cast<std::size_t>(vocab));
    for (std::size_t i = 0; i < running.size(); ++i) {
      for (int v = 0; v < vocab; ++v) {
        if (!emittable(v)) continue;
        candidates.push_back({running[i].score + static_cast<double>(lp[i * static_cast<std::size_t>(vocab) + static_cast<std::size_t>(v)]), i, v});
      }
    }
    // All running hypotheses share a length, so sequence order is parent
    // order followed by the new token.
    auto keep = std::min(beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [&](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        const auto& ta = running[a.parent].tokens;
                        const auto& tb = running[b.parent].tokens;
                        if (ta != tb) return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    std::vector<int> rows;
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& cand = candidates[c];
      Hypothesis hyp{running[cand.parent].tokens, cand.score, false};
      if (cand.token == kEos) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(cand.token);
        next.push_back(std::move(hyp));
        rows.push_back(static_cast<int>(cand.parent));
      }
    }
    running = std::move(next);
    if (running.empty()) break;
    h = gather_rows(h, rows);

    // Scores only decrease, so no running hypothesis can overtake a finished
    // one that already scores at least as well.
    if (!finished.empty()) {
      double best_finished = std::max_element(finished.begin(), finished.end(), [](const auto& a, const auto& b) {
                               return a.score < b.score;
                             })->score;
      double best_running = std::max_element(running.begin(), running.end(), [](const auto& a, const auto& b) {
                              return a.score < b.score;
                            })->score;
      if (best_finished >= best_running) break;
    }
  }

  const auto& pool = finished.empty() ? running : finished;
  const Hypothesis* best = &pool.front();
  for (const auto& hyp : pool) {
    if (better(hyp.score, hyp.tokens, best->score, best->tokens)) best = &hyp;
  }
  return *best;
}

template <typename T>
Hypothesis decode(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t beam_width, std::size_t max_len) {
  return beam_width <= 1 ? decode_greedy(decoder, rep, max_len) : decode_beam(decoder, rep, beam_width, max_len);
}

template Hypothesis decode_greedy(const Decoder<float>&, const Tensor<float>&, std::size_t);
template Hypothesis decode_greedy(const Decoder<double>&, const Tensor<double>&, std::size_t);
template Hypothesis decode_beam(const Decoder<float>&, const Tensor<float>&, std::size_t, std::size_t);
template Hypothesis decode_beam(const Decoder<double>&, const Tensor<double>&, std::size_t, std::size_t);
template Hypothesis decode(const Decoder<float>&, const Tensor<float>&, std::size_t, std::size_t);
template Hypothesis decode(const Decoder<double>&, const Tensor<double>&, std::size_t, std::size_t);

}  // namespace corrbridge
