#include "rnnrules/automata.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rnnrules::automata {

Alphabet::Alphabet(std::string syms) : symbols(std::move(syms)) {
  if (symbols.empty()) throw InputError("alphabet must be non-empty");
  for (size_t i = 0; i < symbols.size(); ++i)
    for (size_t j = i + 1; j < symbols.size(); ++j)
      if (symbols[i] == symbols[j])
        throw InputError(std::string("alphabet has duplicate symbol '") + symbols[i] + "'");
}

int Alphabet::index_of(char c) const {
  auto pos = symbols.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

int Alphabet::require_index(char c, size_t position) const {
  int idx = index_of(c);
  if (idx < 0) {
    std::ostringstream os;
    os << "symbol '" << c << "' at position " << position << " is not in alphabet \"" << symbols << "\"";
    throw InputError(os.str());
  }
  return idx;
}

std::vector<int> Dfa::accepting_states() const {
  std::vector<int> out;
  for (int q = 0; q < num_states; ++q)
    if (accepting[q]) out.push_back(q);
  return out;
}

void Dfa::validate() const {
  if (alphabet.symbols.empty()) throw InputError("dfa: empty alphabet");
  if (num_states <= 0) throw InputError("dfa: num_states must be positive");
  if (start < 0 || start >= num_states) throw InputError("dfa: start state out of range");
  if (static_cast<int>(accepting.size()) != num_states)
    throw InputError("dfa: accepting vector size mismatch");
  size_t expected = static_cast<size_t>(num_states) * alphabet.symbols.size();
  if (delta.size() != expected) throw InputError("dfa: delta table size mismatch");
  for (size_t i = 0; i < delta.size(); ++i)
    if (delta[i] < 0 || delta[i] >= num_states) {
      std::ostringstream os;
      os << "dfa: delta entry for state " << i / alphabet.symbols.size() << " symbol "
         << i % alphabet.symbols.size() << " out of range";
      throw InputError(os.str());
    }
}

bool accepts(const Dfa& dfa, std::string_view s) {
  int q = dfa.start;
  for (size_t i = 0; i < s.size(); ++i) {
    int sym = dfa.alphabet.require_index(s[i], i);
    q = dfa.next(q, sym);
  }
  return dfa.is_accepting(q);
}

Dfa complete(const PartialDfa& partial) {
  const int m = partial.alphabet.size();
  bool missing = std::any_of(partial.delta.begin(), partial.delta.end(), [](int t) { return t < 0; });
  Dfa out;
  out.alphabet = partial.alphabet;
  out.start = partial.start;
  out.accepting = partial.accepting;
  if (!missing) {
    out.num_states = partial.num_states;
    out.delta = partial.delta;
    out.validate();
    return out;
  }
  int sink = partial.num_states;
  out.num_states = partial.num_states + 1;
  out.accepting.push_back(0);
  out.delta.assign(static_cast<size_t>(out.num_states) * m, sink);
  for (int q = 0; q < partial.num_states; ++q)
    for (int a = 0; a < m; ++a) {
      int t = partial.delta[static_cast<size_t>(q) * m + a];
      out.delta[static_cast<size_t>(q) * m + a] = t < 0 ? sink : t;
    }
  out.validate();
  return out;
}

namespace {

// Reachable-only copy of `dfa`, states renumbered in BFS discovery order
// from the start (symbols in alphabet order).
Dfa trim_and_renumber(const Dfa& dfa) {
  const int m = dfa.alphabet.size();
  std::vector<int> order(dfa.num_states, -1);
  std::vector<int> bfs;
  order[dfa.start] = 0;
  bfs.push_back(dfa.start);
  for (size_t i = 0; i < bfs.size(); ++i) {
    int q = bfs[i];
    for (int a = 0; a < m; ++a) {
      int t = dfa.next(q, a);
      if (order[t] < 0) {
        order[t] = static_cast<int>(bfs.size());
        bfs.push_back(t);
      }
    }
  }
  Dfa out;
  out.alphabet = dfa.alphabet;
  out.num_states = static_cast<int>(bfs.size());
  out.start = 0;
  out.accepting.assign(out.num_states, 0);
  out.delta.assign(static_cast<size_t>(out.num_states) * m, 0);
  for (int q : bfs) {
    int nq = order[q];
    out.accepting[nq] = dfa.accepting[q];
    for (int a = 0; a < m; ++a) out.delta[static_cast<size_t>(nq) * m + a] = order[dfa.next(q, a)];
  }
  return out;
}

// Hopcroft partition refinement. Returns block index per state.
std::vector<int> hopcroft_blocks(const Dfa& dfa, int& num_blocks) {
  const int n = dfa.num_states;
  const int m = dfa.alphabet.size();

  // Inverse transition lists per (state, symbol).
  std::vector<std::vector<int>> inv(static_cast<size_t>(n) * m);
  for (int q = 0; q < n; ++q)
    for (int a = 0; a < m; ++a) inv[static_cast<size_t>(dfa.next(q, a)) * m + a].push_back(q);

  // Partition kept as: member array grouped by block, per-state location,
  // per-block [begin, end) plus a split marker.
  std::vector<int> member(n), location(n), block_of(n);
  std::vector<int> block_begin, block_end, block_marked;

  {
    int acc = 0;
    for (int q = 0; q < n; ++q) acc += dfa.accepting[q] ? 1 : 0;
    int rej = n - acc;
    int next = 0;
    int acc_block = -1, rej_block = -1;
    if (acc > 0) {
      acc_block = next++;
      block_begin.push_back(0);
      block_end.push_back(acc);
    }
    if (rej > 0) {
      rej_block = next++;
      block_begin.push_back(acc);
      block_end.push_back(n);
    }
    int ia = 0, ir = acc;
    for (int q = 0; q < n; ++q) {
      int pos = dfa.accepting[q] ? ia++ : ir++;
      member[pos] = q;
      location[q] = pos;
      block_of[q] = dfa.accepting[q] ? acc_block : rej_block;
    }
    block_marked.assign(block_begin.size(), 0);
  }

  // Worklist of (block, symbol) splitters.
  std::deque<std::pair<int, int>> worklist;
  std::vector<std::vector<uint8_t>> on_list(block_begin.size(), std::vector<uint8_t>(m, 0));
  auto push_splitter = [&](int b, int a) {
    if (!on_list[b][a]) {
      on_list[b][a] = 1;
      worklist.emplace_back(b, a);
    }
  };
  {
    // Seed with the smaller initial block for every symbol (both when equal).
    int smaller = 0;
    if (block_begin.size() == 2) {
      int s0 = block_end[0] - block_begin[0];
      int s1 = block_end[1] - block_begin[1];
      smaller = s1 < s0 ? 1 : 0;
    }
    for (int a = 0; a < m; ++a) push_splitter(smaller, a);
  }

  std::vector<int> touched_blocks;
  std::vector<int> marked_count;  // lazily sized with blocks
  marked_count.assign(block_begin.size(), 0);

  while (!worklist.empty()) {
    auto [splitter, a] = worklist.front();
    worklist.pop_front();
    on_list[splitter][a] = 0;

    // X = predecessors of splitter's members under symbol a.
    touched_blocks.clear();
    for (int pos = block_begin[splitter]; pos < block_end[splitter]; ++pos) {
      int q = member[pos];
      for (int p : inv[static_cast<size_t>(q) * m + a]) {
        int b = block_of[p];
        int loc = location[p];
        int mark_end = block_begin[b] + marked_count[b];
        if (loc < mark_end) continue;  // already marked
        if (marked_count[b] == 0) touched_blocks.push_back(b);
        // Swap p into the marked prefix of its block.
        int other = member[mark_end];
        member[mark_end] = p;
        member[loc] = other;
        location[p] = mark_end;
        location[other] = loc;
        marked_count[b]++;
      }
    }

    for (int b : touched_blocks) {
      int size = block_end[b] - block_begin[b];
      int marked = marked_count[b];
      marked_count[b] = 0;
      if (marked == size) continue;  // no split
      // New block takes the marked prefix.
      int nb = static_cast<int>(block_begin.size());
      block_begin.push_back(block_begin[b]);
      block_end.push_back(block_begin[b] + marked);
      block_begin[b] += marked;
      for (int pos = block_begin[nb]; pos < block_end[nb]; ++pos) block_of[member[pos]] = nb;
      on_list.emplace_back(m, 0);
      marked_count.push_back(0);
      int size_new = marked, size_old = size - marked;
      for (int c = 0; c < m; ++c) {
        if (on_list[b][c]) {
          push_splitter(nb, c);
        } else {
          push_splitter(size_new <= size_old ? nb : b, c);
        }
      }
    }
  }

  num_blocks = static_cast<int>(block_begin.size());
  return block_of;
}

}  // namespace

Dfa minimize(const Dfa& dfa) {
  dfa.validate();
  Dfa trimmed = trim_and_renumber(dfa);
  const int m = trimmed.alphabet.size();
  int num_blocks = 0;
  std::vector<int> block_of = hopcroft_blocks(trimmed, num_blocks);

  Dfa merged;
  merged.alphabet = trimmed.alphabet;
  merged.num_states = num_blocks;
  merged.start = block_of[trimmed.start];
  merged.accepting.assign(num_blocks, 0);
  merged.delta.assign(static_cast<size_t>(num_blocks) * m, 0);
  for (int q = 0; q < trimmed.num_states; ++q) {
    int b = block_of[q];
    merged.accepting[b] = trimmed.accepting[q];
    for (int a = 0; a < m; ++a)
      merged.delta[static_cast<size_t>(b) * m + a] = block_of[trimmed.next(q, a)];
  }
  return trim_and_renumber(merged);
}

std::optional<std::string> equivalent(const Dfa& a, const Dfa& b) {
  a.validate();
  b.validate();
  if (a.alphabet != b.alphabet)
    throw InputError("equivalent: alphabets differ (\"" + a.alphabet.symbols + "\" vs \"" +
                     b.alphabet.symbols + "\")");
  const int m = a.alphabet.size();
  const int nb = b.num_states;
  auto key = [nb](int qa, int qb) { return static_cast<size_t>(qa) * nb + qb; };

  std::vector<uint8_t> seen(static_cast<size_t>(a.num_states) * nb, 0);
  std::vector<int> parent(seen.size(), -1);
  std::vector<int> via(seen.size(), -1);

  auto mismatch = [&](int qa, int qb) { return a.is_accepting(qa) != b.is_accepting(qb); };
  auto path_to = [&](size_t k) {
    std::string s;
    while (parent[k] >= 0) {
      s.push_back(a.alphabet.symbols[via[k]]);
      k = static_cast<size_t>(parent[k]);
    }
    std::reverse(s.begin(), s.end());
    return s;
  };

  std::deque<size_t> queue;
  size_t start_key = key(a.start, b.start);
  seen[start_key] = 1;
  if (mismatch(a.start, b.start)) return std::string();
  queue.push_back(start_key);
  while (!queue.empty()) {
    size_t k = queue.front();
    queue.pop_front();
    int qa = static_cast<int>(k / nb);
    int qb = static_cast<int>(k % nb);
    for (int sym = 0; sym < m; ++sym) {
      size_t nk = key(a.next(qa, sym), b.next(qb, sym));
      if (seen[nk]) continue;
      seen[nk] = 1;
      parent[nk] = static_cast<int>(k);
      via[nk] = sym;
      if (mismatch(static_cast<int>(nk / nb), static_cast<int>(nk % nb))) return path_to(nk);
      queue.push_back(nk);
    }
  }
  return std::nullopt;
}

double evaluate(const Dfa& dfa, const std::vector<Sample>& split) {
  if (split.empty()) throw InputError("evaluate: empty split");
  size_t hits = 0;
  for (const auto& sample : split)
    if (accepts(dfa, sample.s) == sample.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(split.size());
}

StringEnumerator::StringEnumerator(Alphabet alphabet, int max_len)
    : alphabet_(std::move(alphabet)), max_len_(max_len) {}

std::optional<std::string> StringEnumerator::next() {
  if (!emitted_empty_) {
    emitted_empty_ = true;
    if (max_len_ < 0) return std::nullopt;
    return std::string();
  }
  const int m = alphabet_.size();
  // Advance the odometer; carry overflow grows the length.
  int i = static_cast<int>(digits_.size()) - 1;
  while (i >= 0 && digits_[i] == m - 1) digits_[i--] = 0;
  if (i >= 0) {
    digits_[i]++;
  } else {
    if (len_ >= max_len_) return std::nullopt;
    ++len_;
    digits_.assign(len_, 0);
  }
  std::string s(digits_.size(), ' ');
  for (size_t j = 0; j < digits_.size(); ++j) s[j] = alphabet_.symbols[digits_[j]];
  return s;
}

std::vector<std::string> all_strings(const Alphabet& alphabet, int max_len) {
  std::vector<std::string> out;
  StringEnumerator en(alphabet, max_len);
  while (auto s = en.next()) out.push_back(*s);
  return out;
}

std::string serialize(const Dfa& dfa) {
  dfa.validate();
  nlohmann::json j;
  auto alpha = nlohmann::json::array();
  for (char c : dfa.alphabet.symbols) alpha.push_back(std::string(1, c));
  j["alphabet"] = alpha;
  j["start"] = dfa.start;
  j["accepting"] = dfa.accepting_states();
  auto rows = nlohmann::json::array();
  for (int q = 0; q < dfa.num_states; ++q) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < dfa.alphabet.size(); ++a) row.push_back(dfa.next(q, a));
    rows.push_back(row);
  }
  j["delta"] = rows;
  return j.dump();
}

Dfa deserialize(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("dfa json: ") + e.what());
  }
  for (const char* field : {"alphabet", "start", "accepting", "delta"})
    if (!j.contains(field)) throw InputError(std::string("dfa json: missing field \"") + field + "\"");

  std::string symbols;
  for (const auto& tok : j.at("alphabet")) {
    std::string t = tok.get<std::string>();
    if (t.size() != 1) throw InputError("dfa json: alphabet tokens must be single characters");
    symbols += t;
  }
  Dfa dfa;
  dfa.alphabet = Alphabet(symbols);
  const auto& rows = j.at("delta");
  if (!rows.is_array() || rows.empty()) throw InputError("dfa json: delta must be a non-empty array");
  dfa.num_states = static_cast<int>(rows.size());
  dfa.accepting.assign(dfa.num_states, 0);
  for (int q = 0; q < dfa.num_states; ++q) {
    const auto& row = rows.at(q);
    if (!row.is_array() || static_cast<int>(row.size()) != dfa.alphabet.size()) {
      std::ostringstream os;
      os << "dfa json: delta row for state " << q << " must have " << dfa.alphabet.size() << " entries";
      throw InputError(os.str());
    }
    for (const auto& t : row) dfa.delta.push_back(t.get<int>());
  }
  dfa.start = j.at("start").get<int>();
  for (const auto& q : j.at("accepting")) {
    int idx = q.get<int>();
    if (idx < 0 || idx >= dfa.num_states) throw InputError("dfa json: accepting state out of range");
    dfa.accepting[idx] = 1;
  }
  dfa.validate();
  return dfa;
}

std::string emit_dot(const Dfa& dfa) {
  dfa.validate();
  std::ostringstream os;
  os << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (int q = 0; q < dfa.num_states; ++q)
    os << "  q" << q << " [shape=" << (dfa.is_accepting(q) ? "doublecircle" : "circle") << "];\n";
  os << "  __start -> q" << dfa.start << ";\n";
  for (int q = 0; q < dfa.num_states; ++q)
    for (int a = 0; a < dfa.alphabet.size(); ++a)
      os << "  q" << q << " -> q" << dfa.next(q, a) << " [label=\"" << dfa.alphabet.symbols[a]
         << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace rnnrules::automata
