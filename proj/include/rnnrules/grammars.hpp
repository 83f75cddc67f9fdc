#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rnnrules/automata.hpp"
#include "rnnrules/common.hpp"

namespace rnnrules::grammars {

enum class GrammarKind { Tomita, Dyck };

/// A benchmark language: Tomita 1..7 over {a,b} or Dyck-k over k bracket
/// pairs (k in {2,3,6,8} for datasets; the oracles accept any k in 1..8).
struct GrammarSpec {
  GrammarKind kind = GrammarKind::Tomita;
  int id = 1;  // Tomita id or Dyck k

  automata::Alphabet alphabet() const;
  std::string name() const;
  bool label(std::string_view s) const;
  /// Membership verdict for every prefix of s (index t = prefix of length
  /// t+1), computed in one pass.
  std::vector<uint8_t> prefix_labels(std::string_view s) const;
  /// Unit for hidden-size multiples: minimal DFA states for Tomita, k for
  /// Dyck-k.
  int hidden_base() const;
  /// Unit for cluster-count candidates: minimal DFA states for Tomita, 2k
  /// for Dyck-k.
  int candidate_base() const;

  static GrammarSpec parse(const std::string& name);
  static std::vector<std::string> valid_names();

  bool operator==(const GrammarSpec&) const = default;
};

/// Minimal ground-truth DFA for Tomita id in 1..7.
automata::Dfa tomita_dfa(int id);

/// Direct run/count checker for Tomita id; independent of tomita_dfa.
bool tomita_label(int id, std::string_view s);

int tomita_min_states(int id);

/// Bracket alphabet for Dyck-k: the first k pairs of "()[]{}<>AaBbCcDd",
/// opens and closes interleaved in pair order.
std::string dyck_alphabet(int k);

/// Well-nestedness via a stack scan; epsilon is accepted.
bool dyck_label(int k, std::string_view s);

/// Balanced Dyck-k string of exactly target_len symbols, drawn by
/// Catalan-weighted derivation splits with uniform bracket types.
std::string generate_dyck_positive(int k, int target_len, Rng& rng);

/// Single mutation (replace/swap/insert/delete) of a balanced string,
/// re-checked to be negative and to stay within [min_len, max_len].
/// Returns nullopt when no negative was found within the retry bound.
std::optional<std::string> perturb_negative(int k, const std::string& positive, Rng& rng,
                                            int min_len = 1, int max_len = 1 << 20);

}  // namespace rnnrules::grammars
