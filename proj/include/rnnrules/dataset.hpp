#pragma once

#include <array>
#include <string>
#include <vector>

#include "rnnrules/grammars.hpp"

namespace rnnrules::grammars {

inline constexpr int kBin0MinLen = 2;
inline constexpr int kBin0MaxLen = 50;
inline constexpr int kBin1MinLen = 51;
inline constexpr int kBin1MaxLen = 100;

inline const std::array<const char*, 4> kSplitNames = {"train", "val", "test_bin0", "test_bin1"};

struct SplitSizes {
  int train = 10000;
  int val = 2000;
  int test_bin0 = 2000;
  int test_bin1 = 2000;

  int of(int split_index) const;
  bool operator==(const SplitSizes&) const = default;
};

SplitSizes default_sizes(const GrammarSpec& spec);

/// Per-split generation bookkeeping. `sparse_fallback` means the class pool
/// was too small for a balanced split of distinct strings and scarce-class
/// strings were repeated (every distinct string of that class in range is
/// present).
struct SplitMeta {
  int positives = 0;
  int negatives = 0;
  bool sparse_fallback = false;
  int distinct_positives = 0;
  int distinct_negatives = 0;
  long discarded_perturbations = 0;
};

struct LabeledDataset {
  GrammarSpec grammar;
  SplitSizes sizes;
  uint64_t seed = 0;
  std::array<std::vector<automata::Sample>, 4> splits;  // order of kSplitNames
  std::array<SplitMeta, 4> meta;

  const std::vector<automata::Sample>& split(std::string_view name) const;
  const std::vector<automata::Sample>& train() const { return splits[0]; }
  const std::vector<automata::Sample>& val() const { return splits[1]; }
  const std::vector<automata::Sample>& test_bin0() const { return splits[2]; }
  const std::vector<automata::Sample>& test_bin1() const { return splits[3]; }
};

/// Deterministic per (spec, sizes, seed). Splits are disjoint as string
/// sets; labels match the grammar oracle; each split is ~50/50 balanced,
/// with the sparse fallback documented in meta when a class pool runs out.
LabeledDataset sample_dataset(const GrammarSpec& spec, const SplitSizes& sizes, uint64_t seed);

void write_jsonl(const LabeledDataset& ds, const std::string& path);
LabeledDataset read_jsonl(const std::string& path);

/// Per-length membership vectors over lexicographically ordered strings,
/// sampled at deterministic stratified indices once a length exceeds `cap`.
struct RingData {
  GrammarSpec grammar;
  int max_len = 0;
  size_t cap = 0;
  std::vector<std::vector<uint64_t>> indices;  // [len-1] -> string indices
  std::vector<std::vector<uint8_t>> labels;    // [len-1] -> labels, same order
};

RingData ring_representation(const GrammarSpec& spec, int max_len, size_t cap = 4096);
std::string ring_csv(const RingData& ring);

/// The string at lexicographic `index` among all length-`len` strings.
std::string string_at_index(const automata::Alphabet& alphabet, int len, uint64_t index);

}  // namespace rnnrules::grammars
