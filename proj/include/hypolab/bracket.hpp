#pragma once
#include <string>
#include <vector>

#include "hypolab/polymap.hpp"
#include "hypolab/problem.hpp"

namespace hypolab {

// Left-nested bracket word [[...[q_s, l2], l3], ..., lm]. letters[0] is the
// seed noise index; subsequent letters are kDrift (the full drift -A+F) or a
// noise index. Indices are 0-based in memory, 1-based in display.
struct BracketWord {
  static constexpr int kDrift = -1;
  std::vector<int> letters;

  int depth() const { return static_cast<int>(letters.size()); }
  std::string str() const;
  bool operator==(const BracketWord& o) const { return letters == o.letters; }
};

// One homogeneous component of the bracket named by `word`. A word whose
// bracket is a mixed-degree polynomial map contributes one element per
// degree present.
struct BracketElement {
  BracketWord word;
  PolyMap<Rational> map;
};

struct BracketSet {
  int depth_limit = 0;
  std::vector<BracketElement> elements;
  std::vector<std::size_t> constant_indices;   // elements with degree 0: Lambda
  std::vector<std::size_t> per_depth_counts;   // [t-1] = elements of depth t
  std::size_t dedup_count = 0;                 // suppressed duplicate components
  std::size_t structural_zero_count = 0;       // words whose bracket vanished

  std::vector<std::vector<Rational>> constants() const;
  std::vector<const BracketElement*> constant_elements() const;
};

struct GenerateOptions {
  // A-priori bound on words enumerated; exceeding it raises BudgetError
  // before any work is done.
  unsigned long long word_budget = 2'000'000;
  // When set, components too deep in degree to shed down to a constant
  // within depth_limit are not expanded further. Lambda is unaffected;
  // non-constant elements at depth > that bound are omitted.
  bool constants_only = false;
};

// All left-nested iterated brackets of depth <= depth_limit, seeds q_i,
// letters {drift} + noise indices. Structural zeros are pruned; equal
// components are deduplicated keeping the first word as provenance.
BracketSet generate_brackets(const ProblemSpec& problem, int depth_limit,
                             const GenerateOptions& opt = {});

// Recomputes the full polynomial bracket of a word from scratch. Every
// stored element of that word is one of its homogeneous parts.
PolySum<Rational> recompute_word(const ProblemSpec& problem, const BracketWord& word);

}  // namespace hypolab
