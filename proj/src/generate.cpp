#include "brepforge/generate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "brepforge/validate.hpp"

namespace brepforge {

std::vector<double> UniformDistribution::next_token_probs(std::span<const int>,
                                                          const DistributionContext& ctx) const {
  return std::vector<double>(ctx.vocab_size, 1.0 / ctx.vocab_size);
}

std::vector<double> PointMassDistribution::next_token_probs(std::span<const int> prefix,
                                                            const DistributionContext& ctx) const {
  std::vector<double> probs(ctx.vocab_size, 0.0);
  if (prefix.size() < tokens_.size()) {
    const int tok = tokens_[prefix.size()];
    if (tok >= 0 && tok < ctx.vocab_size) {
      probs[tok] = 1.0;
      return probs;
    }
  }
  // Past the stored stream (or out of vocabulary): fall back to uniform.
  std::fill(probs.begin(), probs.end(), 1.0 / ctx.vocab_size);
  return probs;
}

CountModel fit_count_model(const std::vector<std::vector<int>>& corpus, int order) {
  if (corpus.empty()) raise(ErrorCode::EmptyCorpus, "count model needs a non-empty corpus");
  if (order < 1) raise(ErrorCode::BadSpec, "count model order must be >= 1");

  CountModel m;
  m.order_ = order;
  m.tables_.resize(order + 1);
  std::set<int> alphabet;
  std::vector<int> key;
  for (const auto& seq : corpus) {
    for (size_t pos = 0; pos < seq.size(); ++pos) {
      alphabet.insert(seq[pos]);
      for (int k = 0; k <= order; ++k) {
        if (pos < static_cast<size_t>(k)) continue;
        key.clear();
        key.push_back(static_cast<int>(pos));
        for (size_t i = pos - k; i < pos; ++i) key.push_back(seq[i]);
        m.tables_[k][key][seq[pos]]++;
      }
    }
  }
  m.alphabet_.assign(alphabet.begin(), alphabet.end());
  return m;
}

std::vector<double> CountModel::next_token_probs(std::span<const int> prefix,
                                                 const DistributionContext& ctx) const {
  std::vector<double> probs(ctx.vocab_size, 0.0);
  const int pos = static_cast<int>(prefix.size());

  std::vector<int> key;
  for (int k = std::min<int>(order_, pos); k >= 0; --k) {
    key.clear();
    key.push_back(pos);
    for (int i = pos - k; i < pos; ++i) key.push_back(prefix[i]);
    const auto it = tables_[k].find(key);
    if (it == tables_[k].end()) continue;

    // Add-one smoothing over the alphabet seen in training, clipped to the
    // requested vocabulary.
    double total = 0.0;
    for (int tok : alphabet_) {
      if (tok >= ctx.vocab_size) continue;
      const auto cit = it->second.find(tok);
      const double c = (cit == it->second.end() ? 0.0 : cit->second) + 1.0;
      probs[tok] = c;
      total += c;
    }
    if (total <= 0.0) break;
    for (double& p : probs) p /= total;
    return probs;
  }
  // Position never seen (or alphabet empty in range): uniform.
  std::fill(probs.begin(), probs.end(), 1.0 / ctx.vocab_size);
  return probs;
}

double CountModel::sequence_log_prob(std::span<const int> tokens,
                                     const DistributionContext& ctx) const {
  double lp = 0.0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto probs = next_token_probs(tokens.subspan(0, i), ctx);
    const int tok = tokens[i];
    const double p = (tok >= 0 && tok < ctx.vocab_size) ? probs[tok] : 0.0;
    lp += std::log(std::max(p, 1e-300));
  }
  return lp;
}

std::vector<CountModel::TableEntry> CountModel::export_tables() const {
  std::vector<TableEntry> out;
  for (int k = 0; k <= order_; ++k) {
    for (const auto& [key, counts] : tables_[k]) {
      TableEntry e;
      e.key = key;
      e.counts.assign(counts.begin(), counts.end());
      std::sort(e.counts.begin(), e.counts.end());
      out.push_back(std::move(e));
    }
  }
  return out;
}

CountModel CountModel::from_tables(int order, std::vector<int> alphabet,
                                   const std::vector<TableEntry>& entries) {
  CountModel m;
  m.order_ = order;
  m.alphabet_ = std::move(alphabet);
  m.tables_.resize(order + 1);
  for (const auto& e : entries) {
    const int k = static_cast<int>(e.key.size()) - 1;
    auto& dest = m.tables_.at(k)[e.key];
    for (const auto& [tok, cnt] : e.counts) dest[tok] = cnt;
  }
  return m;
}

namespace {

int draw(const std::vector<double>& probs, std::mt19937_64& rng) {
  std::discrete_distribution<int> dist(probs.begin(), probs.end());
  return dist(rng);
}

bool fef_has_isolated_face(const FefMatrix& f) {
  for (int k = 0; k < f.n; ++k) {
    bool any = false;
    for (int l = 0; l < f.n && !any; ++l) any = f.at(k, l) != 0;
    if (!any) return true;
  }
  return false;
}

}  // namespace

EfSequence sample_ef_sequence(const SequenceDistribution& d, std::mt19937_64& rng,
                              const SampleOptions& opts) {
  const DistributionContext ctx{opts.max_shared + 1};
  const size_t length = static_cast<size_t>(opts.m_f) * (opts.m_f - 1) / 2;

  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    EfSequence s;
    s.m_f = opts.m_f;
    s.tokens.reserve(length);
    for (size_t i = 0; i < length; ++i)
      s.tokens.push_back(draw(d.next_token_probs(s.tokens, ctx), rng));

    bool empty = std::all_of(s.tokens.begin(), s.tokens.end(), [](int t) { return t == 0; });
    if (empty) continue;
    if (fef_has_isolated_face(sequence_to_fef(s))) continue;
    return s;
  }
  raise(ErrorCode::MaxRetriesExceeded,
        "no acceptable edge-face sample in " + std::to_string(opts.max_retries + 1) + " draws");
}

EvSequence sample_ev_sequence(const SequenceDistribution& d, const FefMatrix& f,
                              std::mt19937_64& rng, const SampleOptions& opts) {
  EvStreamDecoder decoder = EvStreamDecoder::from_fef(f);
  const DistributionContext ctx{2 * decoder.num_edges() + 2};

  std::vector<int> encoded;       // model-side view of the emitted stream
  EvStreamDecoder face_start = decoder;
  size_t face_start_len = 0;
  int face_attempts = 0;

  std::vector<int> feasible;
  std::vector<double> masked;
  while (!decoder.complete()) {
    feasible.clear();
    for (int enc = 0; enc < ctx.vocab_size; ++enc)
      if (decoder.token_allowed(decode_ev_token(enc))) feasible.push_back(enc);

    if (feasible.empty()) {
      if (++face_attempts > opts.max_retries)
        raise(ErrorCode::MaxRetriesExceeded,
              "face " + std::to_string(decoder.current_face()) + " dead-ended " +
                  std::to_string(face_attempts) + " times");
      decoder = face_start;
      encoded.resize(face_start_len);
      continue;
    }

    const auto probs = d.next_token_probs(encoded, ctx);
    masked.assign(ctx.vocab_size, 0.0);
    double total = 0.0;
    for (int enc : feasible) {
      masked[enc] = probs[enc];
      total += probs[enc];
    }
    if (total <= 0.0)
      for (int enc : feasible) masked[enc] = 1.0;  // distribution put no mass on feasible

    const int enc = draw(masked, rng);
    decoder.feed(decode_ev_token(enc));
    encoded.push_back(enc);

    if (decode_ev_token(enc) == kFaceEnd) {
      face_start = decoder;
      face_start_len = encoded.size();
      face_attempts = 0;
    }
  }

  EvSequence s;
  s.tokens.reserve(encoded.size());
  for (int enc : encoded) s.tokens.push_back(decode_ev_token(enc));
  return s;
}

Topology generate_topology(const SequenceDistribution& ef_model,
                           const SequenceDistribution& ev_model, std::mt19937_64& rng,
                           const SampleOptions& opts) {
  const EfSequence ef_seq = sample_ef_sequence(ef_model, rng, opts);
  const FefMatrix fef = sequence_to_fef(ef_seq);
  const EvSequence ev_seq = sample_ev_sequence(ev_model, fef, rng, opts);
  Topology t = sequence_to_ev(ev_seq, fef);
  if (!validate(t).valid())
    raise(ErrorCode::InvalidTopology, "internal: masked sample failed validation");
  return t;
}

}  // namespace brepforge
