#include "rnnrules/grammars.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace rnnrules::grammars {

namespace {

constexpr std::array<int, 7> kTomitaStates = {2, 3, 5, 4, 4, 3, 5};
constexpr const char* kDyckPairs = "()[]{}<>AaBbCcDd";
constexpr int kMaxDyck = 8;

void check_tomita_id(int id) {
  if (id < 1 || id > 7) {
    std::ostringstream os;
    os << "tomita id " << id << " out of range 1..7";
    throw InputError(os.str());
  }
}

void check_dyck_k(int k) {
  if (k < 1 || k > kMaxDyck) {
    std::ostringstream os;
    os << "dyck k " << k << " out of range 1.." << kMaxDyck;
    throw InputError(os.str());
  }
}

automata::Dfa make_dfa(int num_states, int start, std::initializer_list<int> accepting,
                       std::initializer_list<int> delta) {
  automata::Dfa d;
  d.alphabet = automata::Alphabet("ab");
  d.num_states = num_states;
  d.start = start;
  d.accepting.assign(num_states, 0);
  for (int q : accepting) d.accepting[q] = 1;
  d.delta.assign(delta);
  d.validate();
  return d;
}

}  // namespace

int tomita_min_states(int id) {
  check_tomita_id(id);
  return kTomitaStates[id - 1];
}

automata::Dfa tomita_dfa(int id) {
  check_tomita_id(id);
  switch (id) {
    case 1:
      // a*: 0 clean, 1 dead.
      return make_dfa(2, 0, {0}, {0, 1, 1, 1});
    case 2:
      // (ab)*: 0 even, 1 saw a, 2 dead.
      return make_dfa(3, 0, {0}, {1, 2, 2, 0, 2, 2});
    case 3:
      // Reject once a maximal odd run of a's is followed by an odd run of
      // b's. 0 neutral / even a-run, 1 odd a-run, 2 odd constrained b-run,
      // 3 even constrained b-run, 4 dead.
      return make_dfa(5, 0, {0, 1, 3},
                      {1, 0,    // 0
                       0, 2,    // 1
                       4, 3,    // 2
                       1, 2,    // 3
                       4, 4});  // 4
    case 4:
      // No trigram aaa: states count trailing a's, 3 dead.
      return make_dfa(4, 0, {0, 1, 2},
                      {1, 0,    // 0
                       2, 0,    // 1
                       3, 0,    // 2
                       3, 3});  // 3
    case 5: {
      // Both #a and #b even: state = parity pair (pa, pb) as 2*pa + pb.
      automata::Dfa d;
      d.alphabet = automata::Alphabet("ab");
      d.num_states = 4;
      d.start = 0;
      d.accepting = {1, 0, 0, 0};
      d.delta.assign(8, 0);
      for (int q = 0; q < 4; ++q) {
        int pa = q >> 1, pb = q & 1;
        d.delta[q * 2 + 0] = ((pa ^ 1) << 1) | pb;
        d.delta[q * 2 + 1] = (pa << 1) | (pb ^ 1);
      }
      d.validate();
      return d;
    }
    case 6: {
      // #a - #b ≡ 0 (mod 3): state = difference mod 3.
      automata::Dfa d;
      d.alphabet = automata::Alphabet("ab");
      d.num_states = 3;
      d.start = 0;
      d.accepting = {1, 0, 0};
      d.delta.assign(6, 0);
      for (int q = 0; q < 3; ++q) {
        d.delta[q * 2 + 0] = (q + 1) % 3;
        d.delta[q * 2 + 1] = (q + 2) % 3;
      }
      d.validate();
      return d;
    }
    case 7:
    default:
      // b*a*b*a*: phases 0..3, 4 dead.
      return make_dfa(5, 0, {0, 1, 2, 3},
                      {1, 0,    // 0: in first b*
                       1, 2,    // 1: in first a*
                       3, 2,    // 2: in second b*
                       3, 4,    // 3: in second a*
                       4, 4});  // 4
  }
}

bool tomita_label(int id, std::string_view s) {
  check_tomita_id(id);
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i] != 'a' && s[i] != 'b') {
      std::ostringstream os;
      os << "symbol '" << s[i] << "' at position " << i << " is not in alphabet \"ab\"";
      throw InputError(os.str());
    }
  switch (id) {
    case 1:
      return s.find('b') == std::string_view::npos;
    case 2: {
      if (s.size() % 2 != 0) return false;
      for (size_t i = 0; i < s.size(); i += 2)
        if (s[i] != 'a' || s[i + 1] != 'b') return false;
      return true;
    }
    case 3: {
      // Scan maximal runs; an odd a-run immediately followed by an odd
      // b-run is forbidden.
      size_t i = 0;
      while (i < s.size()) {
        if (s[i] == 'b') {
          ++i;
          continue;
        }
        size_t ra = 0;
        while (i < s.size() && s[i] == 'a') ++i, ++ra;
        size_t rb = 0;
        while (i < s.size() && s[i] == 'b') ++i, ++rb;
        if (ra % 2 == 1 && rb % 2 == 1) return false;
      }
      return true;
    }
    case 4:
      return s.find("aaa") == std::string_view::npos;
    case 5: {
      size_t na = static_cast<size_t>(std::count(s.begin(), s.end(), 'a'));
      return na % 2 == 0 && (s.size() - na) % 2 == 0;
    }
    case 6: {
      long na = std::count(s.begin(), s.end(), 'a');
      long nb = static_cast<long>(s.size()) - na;
      return ((na - nb) % 3 + 3) % 3 == 0;
    }
    case 7:
    default: {
      size_t i = 0;
      for (char phase : {'b', 'a', 'b', 'a'})
        while (i < s.size() && s[i] == phase) ++i;
      return i == s.size();
    }
  }
}

std::string dyck_alphabet(int k) {
  check_dyck_k(k);
  return std::string(kDyckPairs, static_cast<size_t>(2 * k));
}

namespace {

// -1 when not in alphabet; even index = open bracket of pair index/2.
int dyck_symbol_index(int k, char c) {
  for (int i = 0; i < 2 * k; ++i)
    if (kDyckPairs[i] == c) return i;
  return -1;
}

}  // namespace

bool dyck_label(int k, std::string_view s) {
  check_dyck_k(k);
  std::vector<int> stack;
  for (size_t i = 0; i < s.size(); ++i) {
    int idx = dyck_symbol_index(k, s[i]);
    if (idx < 0) {
      std::ostringstream os;
      os << "symbol '" << s[i] << "' at position " << i << " is not in alphabet \""
         << dyck_alphabet(k) << "\"";
      throw InputError(os.str());
    }
    if (idx % 2 == 0) {
      stack.push_back(idx / 2);
    } else {
      if (stack.empty() || stack.back() != idx / 2) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

namespace {

// Catalan numbers as doubles, enough for half-lengths up to 64.
const std::vector<double>& catalan_table() {
  static const std::vector<double> table = [] {
    std::vector<double> c(65, 0.0);
    c[0] = 1.0;
    for (int n = 1; n < 65; ++n) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += c[i] * c[n - 1 - i];
      c[n] = sum;
    }
    return c;
  }();
  return table;
}

void gen_dyck_rec(int k, int half_len, Rng& rng, std::string& out) {
  if (half_len == 0) return;
  const auto& cat = catalan_table();
  // First pair encloses a word of half-length i; weight C_i * C_{m-1-i}.
  double total = cat[half_len];
  double r = rng.uniform() * total;
  int inner = half_len - 1;
  double acc = 0.0;
  for (int i = 0; i < half_len; ++i) {
    acc += cat[i] * cat[half_len - 1 - i];
    if (r < acc) {
      inner = i;
      break;
    }
  }
  int pair = static_cast<int>(rng.below(static_cast<uint64_t>(k)));
  out.push_back(kDyckPairs[2 * pair]);
  gen_dyck_rec(k, inner, rng, out);
  out.push_back(kDyckPairs[2 * pair + 1]);
  gen_dyck_rec(k, half_len - 1 - inner, rng, out);
}

}  // namespace

std::string generate_dyck_positive(int k, int target_len, Rng& rng) {
  check_dyck_k(k);
  if (target_len < 2 || target_len % 2 != 0)
    throw InputError("generate_dyck_positive: target_len must be even and >= 2");
  if (target_len > 128) throw InputError("generate_dyck_positive: target_len > 128 unsupported");
  std::string out;
  out.reserve(static_cast<size_t>(target_len));
  gen_dyck_rec(k, target_len / 2, rng, out);
  return out;
}

std::optional<std::string> perturb_negative(int k, const std::string& positive, Rng& rng,
                                            int min_len, int max_len) {
  check_dyck_k(k);
  const std::string alpha = dyck_alphabet(k);
  const int tries = 16;
  for (int t = 0; t < tries; ++t) {
    std::string s = positive;
    // Length-preserving edits dominate so positives and negatives keep
    // matching length distributions.
    double op = rng.uniform();
    if (s.empty()) op = 0.85;  // force an insert
    if (op < 0.40) {
      size_t i = static_cast<size_t>(rng.below(s.size()));
      char c = alpha[rng.below(alpha.size())];
      s[i] = c;
    } else if (op < 0.80) {
      if (s.size() < 2) continue;
      size_t i = static_cast<size_t>(rng.below(s.size()));
      size_t j = static_cast<size_t>(rng.below(s.size()));
      std::swap(s[i], s[j]);
    } else if (op < 0.90) {
      if (static_cast<int>(s.size()) + 1 > max_len) continue;
      size_t i = static_cast<size_t>(rng.below(s.size() + 1));
      s.insert(s.begin() + i, alpha[rng.below(alpha.size())]);
    } else {
      if (static_cast<int>(s.size()) - 1 < min_len) continue;
      size_t i = static_cast<size_t>(rng.below(s.size()));
      s.erase(s.begin() + i);
    }
    if (s != positive && !dyck_label(k, s)) return s;
  }
  return std::nullopt;
}

automata::Alphabet GrammarSpec::alphabet() const {
  if (kind == GrammarKind::Tomita) return automata::Alphabet("ab");
  return automata::Alphabet(dyck_alphabet(id));
}

std::string GrammarSpec::name() const {
  std::ostringstream os;
  os << (kind == GrammarKind::Tomita ? "tomita" : "dyck") << id;
  return os.str();
}

bool GrammarSpec::label(std::string_view s) const {
  return kind == GrammarKind::Tomita ? tomita_label(id, s) : dyck_label(id, s);
}

std::vector<uint8_t> GrammarSpec::prefix_labels(std::string_view s) const {
  std::vector<uint8_t> out(s.size(), 0);
  if (kind == GrammarKind::Tomita) {
    automata::Dfa d = tomita_dfa(id);
    int q = d.start;
    for (size_t i = 0; i < s.size(); ++i) {
      q = d.next(q, d.alphabet.require_index(s[i], i));
      out[i] = d.is_accepting(q) ? 1 : 0;
    }
  } else {
    std::vector<int> stack;
    bool broken = false;
    for (size_t i = 0; i < s.size(); ++i) {
      int idx = dyck_symbol_index(id, s[i]);
      if (idx < 0) {
        std::ostringstream os;
        os << "symbol '" << s[i] << "' at position " << i << " is not in alphabet \""
           << dyck_alphabet(id) << "\"";
        throw InputError(os.str());
      }
      if (!broken) {
        if (idx % 2 == 0) {
          stack.push_back(idx / 2);
        } else if (stack.empty() || stack.back() != idx / 2) {
          broken = true;
        } else {
          stack.pop_back();
        }
      }
      out[i] = (!broken && stack.empty()) ? 1 : 0;
    }
  }
  return out;
}

int GrammarSpec::hidden_base() const {
  return kind == GrammarKind::Tomita ? tomita_min_states(id) : id;
}

int GrammarSpec::candidate_base() const {
  return kind == GrammarKind::Tomita ? tomita_min_states(id) : 2 * id;
}

GrammarSpec GrammarSpec::parse(const std::string& name) {
  auto fail = [&]() -> GrammarSpec {
    std::ostringstream os;
    os << "unknown grammar \"" << name << "\" (valid:";
    for (const auto& v : valid_names()) os << " " << v;
    os << ")";
    throw InputError(os.str());
  };
  if (name.rfind("tomita", 0) == 0 && name.size() == 7) {
    int id = name[6] - '0';
    if (id >= 1 && id <= 7) return GrammarSpec{GrammarKind::Tomita, id};
    return fail();
  }
  if (name.rfind("dyck", 0) == 0 && name.size() == 5) {
    int k = name[4] - '0';
    if (k == 2 || k == 3 || k == 6 || k == 8) return GrammarSpec{GrammarKind::Dyck, k};
    return fail();
  }
  return fail();
}

std::vector<std::string> GrammarSpec::valid_names() {
  std::vector<std::string> names;
  for (int i = 1; i <= 7; ++i) names.push_back("tomita" + std::to_string(i));
  for (int k : {2, 3, 6, 8}) names.push_back("dyck" + std::to_string(k));
  return names;
}

}  // namespace rnnrules::grammars
