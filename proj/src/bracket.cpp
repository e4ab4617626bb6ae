#include "hypolab/bracket.hpp"

#include <map>
#include <sstream>

#include "hypolab/errors.hpp"

namespace hypolab {

std::string BracketWord::str() const {
  std::string body = "q" + std::to_string(letters[0] + 1);
  for (std::size_t i = 1; i < letters.size(); ++i) {
    std::string l = letters[i] == kDrift ? "D" : "q" + std::to_string(letters[i] + 1);
    body = "[" + body + "," + l + "]";
  }
  if (letters.size() == 1) body = "[" + body + "]";
  return body;
}

std::vector<std::vector<Rational>> BracketSet::constants() const {
  std::vector<std::vector<Rational>> out;
  out.reserve(constant_indices.size());
  for (auto idx : constant_indices) {
    const auto& m = elements[idx].map;
    std::vector<Rational> v(m.dim(), Rational(0));
    for (const auto& [key, c] : m.table()) v[key.first] = c;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<const BracketElement*> BracketSet::constant_elements() const {
  std::vector<const BracketElement*> out;
  out.reserve(constant_indices.size());
  for (auto idx : constant_indices) out.push_back(&elements[idx]);
  return out;
}

namespace {

PolyMap<Rational> constant_map(const std::vector<Rational>& v) {
  PolyMap<Rational> m(0, static_cast<int>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!is_zero(v[k])) m.add_coeff(static_cast<std::uint32_t>(k), {}, v[k]);
  m.normalize();
  return m;
}

std::string sum_key(const PolySum<Rational>& s) {
  std::ostringstream os;
  for (const auto& p : s.parts()) os << to_text(p);
  return os.str();
}

}  // namespace

BracketSet generate_brackets(const ProblemSpec& problem, int depth_limit,
                             const GenerateOptions& opt) {
  problem.validate();
  if (depth_limit < 1) throw DimensionError("generate_brackets: depth_limit must be >= 1");
  const int d = problem.noise_dim();

  // a-priori enumeration count: d seeds, then (d+1)-way branching
  unsigned long long would_generate = 0, level = static_cast<unsigned long long>(d);
  for (int t = 1; t <= depth_limit; ++t) {
    would_generate += level;
    if (would_generate > opt.word_budget)
      throw BudgetError("generate_brackets: word budget exceeded", would_generate);
    if (t < depth_limit) {
      if (level > opt.word_budget / static_cast<unsigned long long>(d + 1))
        throw BudgetError("generate_brackets: word budget exceeded",
                          level * static_cast<unsigned long long>(d + 1));
      level *= static_cast<unsigned long long>(d + 1);
    }
  }

  const PolySum<Rational> drift = problem.drift();
  std::vector<PolySum<Rational>> noise_sums;
  for (const auto& q : problem.noise) {
    PolySum<Rational> s(problem.dim);
    s.add(constant_map(q));
    noise_sums.push_back(std::move(s));
  }

  BracketSet out;
  out.depth_limit = depth_limit;
  out.per_depth_counts.assign(static_cast<std::size_t>(depth_limit), 0);

  std::map<std::string, std::size_t> seen_component;  // map text -> first element
  std::map<std::string, bool> seen_sum;               // frontier dedup

  struct Node {
    BracketWord word;
    PolySum<Rational> value;
  };
  std::vector<Node> frontier;

  auto emit = [&](const BracketWord& word, const PolySum<Rational>& value) {
    for (const auto& part : value.parts()) {
      std::string key = to_text(part);
      auto it = seen_component.find(key);
      if (it != seen_component.end()) {
        ++out.dedup_count;
        continue;
      }
      seen_component.emplace(std::move(key), out.elements.size());
      if (part.degree() == 0) out.constant_indices.push_back(out.elements.size());
      out.elements.push_back({word, part});
      ++out.per_depth_counts[static_cast<std::size_t>(word.depth()) - 1];
    }
  };

  for (int i = 0; i < d; ++i) {
    Node n;
    n.word.letters = {i};
    n.value = noise_sums[i];
    if (n.value.is_zero()) {
      ++out.structural_zero_count;
      continue;
    }
    emit(n.word, n.value);
    if (seen_sum.emplace(sum_key(n.value), true).second) frontier.push_back(std::move(n));
  }

  for (int depth = 2; depth <= depth_limit; ++depth) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      for (int letter = -1; letter < d; ++letter) {
        // degree prune: a component of degree p at this depth can only reach
        // a constant if p fits in the remaining letters
        PolySum<Rational> operand(problem.dim);
        if (opt.constants_only) {
          // a drift letter maps degree p to degrees >= p, a noise letter to
          // p-1; the component must reach 0 within the letters left
          const int room = depth_limit - depth;
          for (const auto& part : node.value.parts()) {
            int p = part.degree();
            if (letter == BracketWord::kDrift ? p > room : p - 1 > room) continue;
            operand.add(part);
          }
          if (operand.is_zero()) continue;
        }
        const PolySum<Rational>& arg = opt.constants_only ? operand : node.value;
        PolySum<Rational> value = (letter == BracketWord::kDrift)
                                      ? lie_bracket(arg, drift)
                                      : lie_bracket(arg, noise_sums[letter]);
        if (value.is_zero()) {
          ++out.structural_zero_count;
          continue;
        }
        Node child;
        child.word = node.word;
        child.word.letters.push_back(letter);
        child.value = std::move(value);
        emit(child.word, child.value);
        if (depth < depth_limit && seen_sum.emplace(sum_key(child.value), true).second)
          next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

PolySum<Rational> recompute_word(const ProblemSpec& problem, const BracketWord& word) {
  if (word.letters.empty()) throw DimensionError("recompute_word: empty word");
  const int d = problem.noise_dim();
  auto check = [&](int letter) {
    if (letter != BracketWord::kDrift && (letter < 0 || letter >= d))
      throw DimensionError("recompute_word: letter out of range");
  };
  check(word.letters[0]);
  if (word.letters[0] == BracketWord::kDrift)
    throw DimensionError("recompute_word: seed must be a noise index");

  PolySum<Rational> acc(problem.dim);
  acc.add(constant_map(problem.noise[word.letters[0]]));
  const PolySum<Rational> drift = problem.drift();
  for (std::size_t i = 1; i < word.letters.size(); ++i) {
    int letter = word.letters[i];
    check(letter);
    if (letter == BracketWord::kDrift)
      acc = lie_bracket(acc, drift);
    else {
      PolySum<Rational> q(problem.dim);
      q.add(constant_map(problem.noise[letter]));
      acc = lie_bracket(acc, q);
    }
  }
  return acc;
}

}  // namespace hypolab
