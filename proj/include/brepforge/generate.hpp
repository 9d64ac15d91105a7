#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "brepforge/serialize.hpp"
#include "brepforge/topology.hpp"

namespace brepforge {

struct DistributionContext {
  int vocab_size = 0;  // tokens are 0 .. vocab_size-1
};

// Next-token model over integer streams; abstracts the paper's sequence
// decoders so a trained network can be plugged in without API changes. The
// returned vector has ctx.vocab_size non-negative entries summing to 1.
class SequenceDistribution {
 public:
  virtual ~SequenceDistribution() = default;
  virtual std::vector<double> next_token_probs(std::span<const int> prefix,
                                               const DistributionContext& ctx) const = 0;
};

class UniformDistribution : public SequenceDistribution {
 public:
  std::vector<double> next_token_probs(std::span<const int> prefix,
                                       const DistributionContext& ctx) const override;
};

// Emits a fixed token stream with probability one; handy reference model.
class PointMassDistribution : public SequenceDistribution {
 public:
  explicit PointMassDistribution(std::vector<int> tokens) : tokens_(std::move(tokens)) {}
  std::vector<double> next_token_probs(std::span<const int> prefix,
                                       const DistributionContext& ctx) const override;

 private:
  std::vector<int> tokens_;
};

// Backoff Markov model with add-one smoothing over the alphabet observed in
// training. Contexts are keyed on (position, trailing window); unseen
// contexts back off to shorter windows, ending at the per-position unigram.
class CountModel : public SequenceDistribution {
 public:
  std::vector<double> next_token_probs(std::span<const int> prefix,
                                       const DistributionContext& ctx) const override;

  int order() const { return order_; }
  const std::vector<int>& alphabet() const { return alphabet_; }
  double sequence_log_prob(std::span<const int> tokens, const DistributionContext& ctx) const;

  struct TableEntry {
    std::vector<int> key;             // position followed by the window tokens
    std::vector<std::pair<int, int>> counts;
  };
  // Flat views for (de)serialization.
  std::vector<TableEntry> export_tables() const;
  static CountModel from_tables(int order, std::vector<int> alphabet,
                                const std::vector<TableEntry>& entries);

 private:
  friend CountModel fit_count_model(const std::vector<std::vector<int>>& corpus, int order);

  struct VecHash {
    size_t operator()(const std::vector<int>& v) const {
      uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (int x : v) h = (h ^ static_cast<uint64_t>(x + 0x7f4a7c15)) * 0x100000001b3ULL;
      return static_cast<size_t>(h);
    }
  };
  using Table = std::unordered_map<std::vector<int>, std::unordered_map<int, int>, VecHash>;

  int order_ = 0;
  std::vector<Table> tables_;  // tables_[k]: keys of k window tokens (plus position)
  std::vector<int> alphabet_;  // sorted tokens seen in training
};

CountModel fit_count_model(const std::vector<std::vector<int>>& corpus, int order);

// Special tokens map below the endpoint range so count tables stay dense:
// kFaceEnd -> 0, kLoopEnd -> 1, endpoint p -> p + 2.
inline int encode_ev_token(int token) { return token >= 0 ? token + 2 : (token == kLoopEnd ? 1 : 0); }
inline int decode_ev_token(int token) { return token >= 2 ? token - 2 : (token == 1 ? kLoopEnd : kFaceEnd); }
inline std::vector<int> encode_ev_tokens(const std::vector<int>& tokens) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int t : tokens) out.push_back(encode_ev_token(t));
  return out;
}

struct SampleOptions {
  int m_f = kDefaultMaxFaces;
  int max_shared = kDefaultMaxSharedEdges;
  int max_retries = 50;
};

// Samples a full-length edge-face sequence; candidates whose decoded matrix
// leaves a used face with zero shared edges are rejected and redrawn.
EfSequence sample_ef_sequence(const SequenceDistribution& d, std::mt19937_64& rng,
                              const SampleOptions& opts = {});

// Autoregressive edge-vertex sampling; every candidate token is feasibility
// masked against the stream decoder, so completed sequences decode cleanly.
// Dead ends restart the current face, up to opts.max_retries per face.
EvSequence sample_ev_sequence(const SequenceDistribution& d, const FefMatrix& f,
                              std::mt19937_64& rng, const SampleOptions& opts = {});

// EF sample -> shared-edge matrix -> masked EV sample -> topology. Completed
// samples always pass validation.
Topology generate_topology(const SequenceDistribution& ef_model,
                           const SequenceDistribution& ev_model, std::mt19937_64& rng,
                           const SampleOptions& opts = {});

}  // namespace brepforge
