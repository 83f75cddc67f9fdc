#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rnnrules/common.hpp"

namespace rnnrules::automata {

/// Ordered, duplicate-free set of single-character symbols. The ordering is
/// fixed at construction and drives one-hot indices and lexicographic
/// enumeration.
struct Alphabet {
  std::string symbols;

  Alphabet() = default;
  explicit Alphabet(std::string syms);

  int size() const { return static_cast<int>(symbols.size()); }
  int index_of(char c) const;
  // Like index_of but throws InputError naming the symbol and its position
  // in the offending string.
  int require_index(char c, size_t position) const;

  bool operator==(const Alphabet&) const = default;
};

struct Sample {
  std::string s;
  bool label = false;
  bool operator==(const Sample&) const = default;
};

/// Complete deterministic finite automaton over `alphabet`. `delta` is a
/// dense num_states x |alphabet| table, row-major.
struct Dfa {
  Alphabet alphabet;
  int num_states = 0;
  int start = 0;
  std::vector<uint8_t> accepting;  // size num_states, 0/1
  std::vector<int> delta;          // size num_states * |alphabet|

  int next(int state, int sym) const { return delta[static_cast<size_t>(state) * alphabet.symbols.size() + sym]; }
  bool is_accepting(int state) const { return accepting[state] != 0; }
  std::vector<int> accepting_states() const;
  void validate() const;  // throws InputError when an invariant is broken

  bool operator==(const Dfa&) const = default;
};

/// Transition table that may have missing edges, marked -1.
struct PartialDfa {
  Alphabet alphabet;
  int num_states = 0;
  int start = 0;
  std::vector<uint8_t> accepting;
  std::vector<int> delta;  // -1 = missing
};

bool accepts(const Dfa& dfa, std::string_view s);

/// Routes every missing edge to a fresh non-accepting sink with self-loops.
/// An already-complete input comes back structurally unchanged.
Dfa complete(const PartialDfa& partial);

/// Hopcroft minimization with an unreachable-state trim first and canonical
/// BFS renumbering after (start first, symbols in alphabet order), so two
/// equivalent inputs minimize to structurally equal automata.
Dfa minimize(const Dfa& dfa);

/// Exact language equivalence via product-automaton reachability. Returns
/// nullopt when L(a) == L(b), otherwise a shortest distinguishing string
/// (ties broken lexicographically).
std::optional<std::string> equivalent(const Dfa& a, const Dfa& b);

/// Fraction of samples where accepts(dfa, s) == label. Empty split is an
/// input error.
double evaluate(const Dfa& dfa, const std::vector<Sample>& split);

/// Yields "", then all strings by length, lexicographic within a length.
class StringEnumerator {
 public:
  StringEnumerator(Alphabet alphabet, int max_len);
  std::optional<std::string> next();

 private:
  Alphabet alphabet_;
  int max_len_;
  int len_ = 0;
  bool emitted_empty_ = false;
  std::vector<int> digits_;
};

std::vector<std::string> all_strings(const Alphabet& alphabet, int max_len);

std::string serialize(const Dfa& dfa);
Dfa deserialize(const std::string& json_text);
std::string emit_dot(const Dfa& dfa);

}  // namespace rnnrules::automata
