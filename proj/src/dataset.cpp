#include "rnnrules/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace rnnrules::grammars {

int SplitSizes::of(int split_index) const {
  switch (split_index) {
    case 0: return train;
    case 1: return val;
    case 2: return test_bin0;
    default: return test_bin1;
  }
}

SplitSizes default_sizes(const GrammarSpec& spec) {
  if (spec.kind == GrammarKind::Dyck) return SplitSizes{20000, 4000, 4000, 4000};
  return SplitSizes{10000, 2000, 2000, 2000};
}

const std::vector<automata::Sample>& LabeledDataset::split(std::string_view name) const {
  for (size_t i = 0; i < kSplitNames.size(); ++i)
    if (name == kSplitNames[i]) return splits[i];
  throw InputError("unknown split \"" + std::string(name) + "\" (valid: train val test_bin0 test_bin1)");
}

namespace {

// Class-conditional uniform sampling of fixed-length strings from a DFA:
// counts[t][q] = number of length-t suffixes from q that land in the target
// class. Counts are doubles; zero stays exact because only sums of
// non-negative terms occur.
class DfaClassSampler {
 public:
  DfaClassSampler(const automata::Dfa& dfa, bool positive, int max_len) : dfa_(dfa) {
    const int n = dfa.num_states;
    counts_.assign(static_cast<size_t>(max_len) + 1, std::vector<double>(n, 0.0));
    for (int q = 0; q < n; ++q)
      counts_[0][q] = (dfa.is_accepting(q) == positive) ? 1.0 : 0.0;
    for (int t = 1; t <= max_len; ++t)
      for (int q = 0; q < n; ++q) {
        double sum = 0.0;
        for (int a = 0; a < dfa.alphabet.size(); ++a) sum += counts_[t - 1][dfa.next(q, a)];
        counts_[t][q] = sum;
      }
  }

  double count(int len) const { return counts_[len][dfa_.start]; }

  double total(int lo, int hi) const {
    double sum = 0.0;
    for (int len = lo; len <= hi; ++len) sum += count(len);
    return sum;
  }

  std::string sample(int len, Rng& rng) const {
    std::string out(static_cast<size_t>(len), ' ');
    int q = dfa_.start;
    for (int t = len; t >= 1; --t) {
      double total = counts_[t][q];
      double r = rng.uniform() * total;
      int chosen = -1;
      double acc = 0.0;
      for (int a = 0; a < dfa_.alphabet.size(); ++a) {
        double w = counts_[t - 1][dfa_.next(q, a)];
        acc += w;
        if (r < acc && w > 0.0) {
          chosen = a;
          break;
        }
      }
      if (chosen < 0) {
        // Rounding pushed r past the last positive weight; take it.
        for (int a = dfa_.alphabet.size() - 1; a >= 0; --a)
          if (counts_[t - 1][dfa_.next(q, a)] > 0.0) {
            chosen = a;
            break;
          }
      }
      out[len - t] = dfa_.alphabet.symbols[chosen];
      q = dfa_.next(q, chosen);
    }
    return out;
  }

  // All class strings with lengths in [lo, hi], shortlex order, up to limit.
  std::vector<std::string> enumerate(int lo, int hi, size_t limit) const {
    std::vector<std::string> out;
    std::string buf;
    for (int len = lo; len <= hi && out.size() < limit; ++len) {
      if (count(len) <= 0.0) continue;
      buf.assign(static_cast<size_t>(len), ' ');
      enum_rec(len, dfa_.start, 0, buf, out, limit);
    }
    return out;
  }

 private:
  void enum_rec(int len, int q, int depth, std::string& buf, std::vector<std::string>& out,
                size_t limit) const {
    if (out.size() >= limit) return;
    if (depth == len) {
      out.push_back(buf);
      return;
    }
    for (int a = 0; a < dfa_.alphabet.size(); ++a) {
      int t = dfa_.next(q, a);
      if (counts_[len - depth - 1][t] <= 0.0) continue;
      buf[depth] = dfa_.alphabet.symbols[a];
      enum_rec(len, t, depth + 1, buf, out, limit);
    }
  }

  automata::Dfa dfa_;
  std::vector<std::vector<double>> counts_;
};

struct BinRange {
  int lo, hi;
};

struct ClassQuota {
  int split_index;
  int want;
};

// Distribute a scarce pool (already shuffled) across split quotas
// proportionally by largest remainder, then top each allocation up by
// resampling with replacement from itself. A split whose allocation is
// empty stays short on this class.
void distribute_scarce(const std::vector<std::string>& pool, const std::vector<ClassQuota>& quotas,
                       bool positive, LabeledDataset& ds, Rng& rng,
                       std::unordered_set<std::string>& used) {
  long total_want = 0;
  for (const auto& q : quotas) total_want += q.want;
  std::vector<int> alloc(quotas.size(), 0);
  if (total_want > 0 && !pool.empty()) {
    long assigned = 0;
    std::vector<std::pair<double, size_t>> remainders;
    for (size_t i = 0; i < quotas.size(); ++i) {
      double exact =
          static_cast<double>(pool.size()) * quotas[i].want / static_cast<double>(total_want);
      alloc[i] = std::min<int>(quotas[i].want, static_cast<int>(exact));
      assigned += alloc[i];
      remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    size_t r = 0;
    while (assigned < static_cast<long>(pool.size()) && r < remainders.size()) {
      size_t i = remainders[r++].second;
      if (alloc[i] < quotas[i].want) {
        alloc[i]++;
        assigned++;
      }
    }
  }
  size_t cursor = 0;
  for (size_t i = 0; i < quotas.size(); ++i) {
    auto& split = ds.splits[quotas[i].split_index];
    auto& meta = ds.meta[quotas[i].split_index];
    std::vector<std::string> own(pool.begin() + cursor, pool.begin() + cursor + alloc[i]);
    cursor += alloc[i];
    meta.sparse_fallback = true;
    (positive ? meta.distinct_positives : meta.distinct_negatives) += static_cast<int>(own.size());
    for (const auto& s : own) {
      split.push_back({s, positive});
      used.insert(s);
    }
    int have = static_cast<int>(own.size());
    if (!own.empty()) {
      while (have < quotas[i].want) {
        split.push_back({own[rng.below(own.size())], positive});
        ++have;
      }
    }
    (positive ? meta.positives : meta.negatives) += have;
  }
}

void fill_tomita_class(LabeledDataset& ds, const automata::Dfa& truth, bool positive,
                       BinRange range, const std::vector<ClassQuota>& quotas, Rng& rng,
                       std::unordered_set<std::string>& used) {
  DfaClassSampler sampler(truth, positive, range.hi);
  long total_want = 0;
  for (const auto& q : quotas) total_want += q.want;
  double pool_size = sampler.total(range.lo, range.hi);

  if (pool_size <= 250000.0) {
    auto pool = sampler.enumerate(range.lo, range.hi, 300000);
    rng.shuffle(pool);
    if (static_cast<long>(pool.size()) >= total_want) {
      size_t cursor = 0;
      for (const auto& q : quotas) {
        auto& split = ds.splits[q.split_index];
        auto& meta = ds.meta[q.split_index];
        for (int i = 0; i < q.want; ++i) {
          split.push_back({pool[cursor], positive});
          used.insert(pool[cursor]);
          ++cursor;
        }
        (positive ? meta.positives : meta.negatives) += q.want;
        (positive ? meta.distinct_positives : meta.distinct_negatives) += q.want;
      }
    } else {
      distribute_scarce(pool, quotas, positive, ds, rng, used);
    }
    return;
  }

  // Large pool: rejection sampling with dedup never starves.
  std::vector<int> lengths;
  for (int len = range.lo; len <= range.hi; ++len)
    if (sampler.count(len) > 0.0) lengths.push_back(len);
  for (const auto& q : quotas) {
    auto& split = ds.splits[q.split_index];
    auto& meta = ds.meta[q.split_index];
    int got = 0;
    long misses = 0;
    while (got < q.want && misses < 200000) {
      int len = lengths[rng.below(lengths.size())];
      std::string s = sampler.sample(len, rng);
      if (!used.insert(s).second) {
        ++misses;
        continue;
      }
      split.push_back({s, positive});
      ++got;
    }
    (positive ? meta.positives : meta.negatives) += got;
    (positive ? meta.distinct_positives : meta.distinct_negatives) += got;
    if (got < q.want) meta.sparse_fallback = true;
  }
}

void fill_dyck_bin(LabeledDataset& ds, int k, BinRange range,
                   const std::vector<ClassQuota>& quotas, Rng& rng,
                   std::unordered_set<std::string>& used) {
  int lo_even = range.lo + (range.lo % 2);
  std::vector<int> even_lengths;
  for (int len = lo_even; len <= range.hi; len += 2) even_lengths.push_back(len);

  for (const auto& q : quotas) {
    auto& split = ds.splits[q.split_index];
    auto& meta = ds.meta[q.split_index];
    int want_pos = q.want;
    int want_neg = ds.sizes.of(q.split_index) - want_pos;

    int got = 0;
    long misses = 0;
    while (got < want_pos && misses < 200000) {
      int len = even_lengths[rng.below(even_lengths.size())];
      std::string s = generate_dyck_positive(k, len, rng);
      if (!used.insert(s).second) {
        ++misses;
        continue;
      }
      split.push_back({s, true});
      ++got;
    }
    meta.positives += got;
    meta.distinct_positives += got;
    if (got < want_pos) meta.sparse_fallback = true;

    // Negatives perturb fresh positives so length distributions match.
    got = 0;
    misses = 0;
    while (got < want_neg && misses < 200000) {
      int len = even_lengths[rng.below(even_lengths.size())];
      std::string base = generate_dyck_positive(k, len, rng);
      auto neg = perturb_negative(k, base, rng, range.lo, range.hi);
      if (!neg) {
        meta.discarded_perturbations++;
        ++misses;
        continue;
      }
      if (!used.insert(*neg).second) {
        ++misses;
        continue;
      }
      split.push_back({*neg, false});
      ++got;
    }
    meta.negatives += got;
    meta.distinct_negatives += got;
    if (got < want_neg) meta.sparse_fallback = true;
  }
}

}  // namespace

LabeledDataset sample_dataset(const GrammarSpec& spec, const SplitSizes& sizes, uint64_t seed) {
  for (int i = 0; i < 4; ++i)
    if (sizes.of(i) <= 0) throw InputError("sample_dataset: split sizes must be positive");

  LabeledDataset ds;
  ds.grammar = spec;
  ds.sizes = sizes;
  ds.seed = seed;

  Rng rng = Rng::derive(seed, fnv1a64(spec.name()));
  std::unordered_set<std::string> used;

  const BinRange bin_ranges[2] = {{kBin0MinLen, kBin0MaxLen}, {kBin1MinLen, kBin1MaxLen}};
  const std::vector<int> bin_splits[2] = {{0, 1, 2}, {3}};

  for (int bin = 0; bin < 2; ++bin) {
    std::vector<ClassQuota> pos_quotas, neg_quotas;
    for (int idx : bin_splits[bin]) {
      int size = sizes.of(idx);
      int pos = (size + 1) / 2;
      pos_quotas.push_back({idx, pos});
      neg_quotas.push_back({idx, size - pos});
    }
    if (spec.kind == GrammarKind::Tomita) {
      automata::Dfa truth = tomita_dfa(spec.id);
      fill_tomita_class(ds, truth, true, bin_ranges[bin], pos_quotas, rng, used);
      fill_tomita_class(ds, truth, false, bin_ranges[bin], neg_quotas, rng, used);
    } else {
      fill_dyck_bin(ds, spec.id, bin_ranges[bin], pos_quotas, rng, used);
    }
  }

  // Interleave each split deterministically so labels are not grouped.
  Rng shuffle_rng = Rng::derive(seed, fnv1a64(spec.name() + "/shuffle"));
  for (auto& split : ds.splits) shuffle_rng.shuffle(split);
  return ds;
}

void write_jsonl(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open \"" + path + "\" for writing");
  nlohmann::json header;
  header["grammar"] = ds.grammar.name();
  header["seed"] = ds.seed;
  header["alphabet"] = ds.grammar.alphabet().symbols;
  header["sizes"] = {{"train", ds.sizes.train},
                     {"val", ds.sizes.val},
                     {"test_bin0", ds.sizes.test_bin0},
                     {"test_bin1", ds.sizes.test_bin1}};
  nlohmann::json meta = nlohmann::json::object();
  for (size_t i = 0; i < kSplitNames.size(); ++i) {
    const auto& m = ds.meta[i];
    meta[kSplitNames[i]] = {{"positives", m.positives},
                            {"negatives", m.negatives},
                            {"sparse_fallback", m.sparse_fallback},
                            {"distinct_positives", m.distinct_positives},
                            {"distinct_negatives", m.distinct_negatives},
                            {"discarded_perturbations", m.discarded_perturbations}};
  }
  header["meta"] = meta;
  out << header.dump() << "\n";
  for (size_t i = 0; i < kSplitNames.size(); ++i)
    for (const auto& sample : ds.splits[i]) {
      nlohmann::json rec;
      rec["s"] = sample.s;
      rec["label"] = sample.label ? 1 : 0;
      rec["split"] = kSplitNames[i];
      out << rec.dump() << "\n";
    }
}

LabeledDataset read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open \"" + path + "\" for reading");
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset file \"" + path + "\" is empty");
  LabeledDataset ds;
  long line_no = 1;
  try {
    nlohmann::json header = nlohmann::json::parse(line);
    ds.grammar = GrammarSpec::parse(header.at("grammar").get<std::string>());
    ds.seed = header.at("seed").get<uint64_t>();
    const auto& sizes = header.at("sizes");
    ds.sizes.train = sizes.at("train").get<int>();
    ds.sizes.val = sizes.at("val").get<int>();
    ds.sizes.test_bin0 = sizes.at("test_bin0").get<int>();
    ds.sizes.test_bin1 = sizes.at("test_bin1").get<int>();
    if (header.contains("meta")) {
      for (size_t i = 0; i < kSplitNames.size(); ++i) {
        const auto& m = header.at("meta").at(kSplitNames[i]);
        ds.meta[i].positives = m.at("positives").get<int>();
        ds.meta[i].negatives = m.at("negatives").get<int>();
        ds.meta[i].sparse_fallback = m.at("sparse_fallback").get<bool>();
        ds.meta[i].distinct_positives = m.at("distinct_positives").get<int>();
        ds.meta[i].distinct_negatives = m.at("distinct_negatives").get<int>();
        ds.meta[i].discarded_perturbations = m.at("discarded_perturbations").get<long>();
      }
    }
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json rec = nlohmann::json::parse(line);
      std::string split = rec.at("split").get<std::string>();
      automata::Sample sample{rec.at("s").get<std::string>(), rec.at("label").get<int>() != 0};
      bool placed = false;
      for (size_t i = 0; i < kSplitNames.size(); ++i)
        if (split == kSplitNames[i]) {
          ds.splits[i].push_back(std::move(sample));
          placed = true;
          break;
        }
      if (!placed) {
        std::ostringstream os;
        os << "dataset file \"" << path << "\" line " << line_no << ": unknown split \"" << split
           << "\"";
        throw InputError(os.str());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    std::ostringstream os;
    os << "dataset file \"" << path << "\" line " << line_no << ": " << e.what();
    throw InputError(os.str());
  }
  return ds;
}

std::string string_at_index(const automata::Alphabet& alphabet, int len, uint64_t index) {
  std::string s(static_cast<size_t>(len), ' ');
  uint64_t m = static_cast<uint64_t>(alphabet.size());
  for (int i = len - 1; i >= 0; --i) {
    s[i] = alphabet.symbols[index % m];
    index /= m;
  }
  return s;
}

RingData ring_representation(const GrammarSpec& spec, int max_len, size_t cap) {
  if (max_len < 1) throw InputError("ring_representation: max_len must be >= 1");
  if (cap < 1) throw InputError("ring_representation: cap must be >= 1");
  RingData ring;
  ring.grammar = spec;
  ring.max_len = max_len;
  ring.cap = cap;
  automata::Alphabet alpha = spec.alphabet();
  for (int len = 1; len <= max_len; ++len) {
    double total_d = std::pow(static_cast<double>(alpha.size()), len);
    std::vector<uint64_t> idx;
    if (total_d <= static_cast<double>(cap)) {
      auto total = static_cast<uint64_t>(total_d);
      idx.resize(total);
      for (uint64_t i = 0; i < total; ++i) idx[i] = i;
    } else {
      idx.resize(cap);
      for (size_t i = 0; i < cap; ++i)
        idx[i] = static_cast<uint64_t>(
            std::floor(total_d * static_cast<double>(i) / static_cast<double>(cap)));
    }
    std::vector<uint8_t> labels(idx.size(), 0);
    for (size_t i = 0; i < idx.size(); ++i)
      labels[i] = spec.label(string_at_index(alpha, len, idx[i])) ? 1 : 0;
    ring.indices.push_back(std::move(idx));
    ring.labels.push_back(std::move(labels));
  }
  return ring;
}

std::string ring_csv(const RingData& ring) {
  std::ostringstream os;
  os << "length,index,label\n";
  for (int len = 1; len <= ring.max_len; ++len) {
    const auto& idx = ring.indices[len - 1];
    const auto& lab = ring.labels[len - 1];
    for (size_t i = 0; i < idx.size(); ++i)
      os << len << "," << idx[i] << "," << static_cast<int>(lab[i]) << "\n";
  }
  return os.str();
}

}  // namespace rnnrules::grammars
