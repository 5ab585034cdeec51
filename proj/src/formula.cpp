#include "tacticrl/formula.hpp"

#include <functional>

#include "tacticrl/errors.hpp"

namespace tacticrl {

namespace {

std::size_t combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

int precedence(Connective c) {
  switch (c) {
    case Connective::Implies: return 1;
    case Connective::Or: return 2;
    case Connective::And: return 3;
    default: return 4;
  }
}

}  // namespace

Formula Formula::make(Connective kind, int atom, const Formula* l, const Formula* r) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->atom = atom;
  node->hash = combine(static_cast<std::size_t>(kind) * 31 + 7, static_cast<std::size_t>(atom + 1));
  if (kind == Connective::Atom) node->atoms = static_cast<std::uint8_t>(1u << atom);
  if (l != nullptr) {
    node->children = {l->node_, r->node_};
    node->depth = 1 + std::max(l->depth(), r->depth());
    node->atoms = l->atom_mask() | r->atom_mask();
    node->hash = combine(combine(node->hash, l->hash()), r->hash());
  }
  return Formula(std::move(node));
}

Formula::Formula() : node_(top().node_) {}

Formula Formula::atom(int index) {
  if (index < 0 || index >= kMaxAtoms) throw ParseError("atom index out of range");
  return make(Connective::Atom, index, nullptr, nullptr);
}

Formula Formula::top() {
  static const Formula t = make(Connective::Top, -1, nullptr, nullptr);
  return t;
}

Formula Formula::bottom() {
  static const Formula f = make(Connective::Bottom, -1, nullptr, nullptr);
  return f;
}

Formula Formula::conj(Formula left, Formula right) { return make(Connective::And, -1, &left, &right); }
Formula Formula::disj(Formula left, Formula right) { return make(Connective::Or, -1, &left, &right); }
Formula Formula::implies(Formula premise, Formula conclusion) {
  return make(Connective::Implies, -1, &premise, &conclusion);
}

bool Formula::equal_nodes(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->atom != b->atom || a->depth != b->depth) return false;
  if (a->children[0] == nullptr) return true;
  return equal_nodes(a->children[0].get(), b->children[0].get()) &&
         equal_nodes(a->children[1].get(), b->children[1].get());
}

bool operator==(const Formula& a, const Formula& b) { return Formula::equal_nodes(a.node_.get(), b.node_.get()); }

char atom_letter(int index) {
  static constexpr char kLetters[kMaxAtoms] = {'A', 'B', 'C', 'D', 'E', 'G', 'H', 'I'};
  return kLetters[index];
}

namespace {

int atom_from_letter(char c) {
  for (int i = 0; i < kMaxAtoms; ++i) {
    if (atom_letter(i) == c) return i;
  }
  return -1;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = implication();
    skip_spaces();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  Formula implication() {
    Formula lhs = disjunction();
    if (accept("->")) return Formula::implies(lhs, implication());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept("|")) f = Formula::disj(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = primary();
    while (accept("&")) f = Formula::conj(f, primary());
    return f;
  }

  Formula primary() {
    skip_spaces();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Formula inner = implication();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    ++pos_;
    if (c == 'T') return Formula::top();
    if (c == 'F') return Formula::bottom();
    if (int a = atom_from_letter(c); a >= 0) return Formula::atom(a);
    --pos_;
    fail(std::string("unexpected character '") + c + "'");
  }

  bool accept(std::string_view token) {
    skip_spaces();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void skip_spaces() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("formula parse error at column " + std::to_string(pos_ + 1) + ": " + what + " in \"" +
                     std::string(text_) + "\"");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render_into(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Connective::Atom: out += atom_letter(f.atom_index()); return;
    case Connective::Top: out += 'T'; return;
    case Connective::Bottom: out += 'F'; return;
    default: break;
  }
  const int prec = precedence(f.kind());
  // `->` is right-associative, `&` and `|` left-associative.
  const bool right_assoc = f.is(Connective::Implies);
  auto child = [&](const Formula& c, bool is_left) {
    int cp = precedence(c.kind());
    bool parens = cp < prec || (cp == prec && (right_assoc ? is_left : !is_left));
    if (parens) out += '(';
    render_into(c, out);
    if (parens) out += ')';
  };
  child(f.left(), true);
  out += f.is(Connective::Implies) ? " -> " : f.is(Connective::Or) ? " | " : " & ";
  child(f.right(), false);
}

std::uint64_t atom_column(int atom, int word) {
  // Row r (0..255) assigns atom a the bit (r >> a) & 1; word w holds rows 64w..64w+63.
  std::uint64_t bits = 0;
  for (int i = 0; i < 64; ++i) {
    int row = word * 64 + i;
    if ((row >> atom) & 1) bits |= 1ULL << i;
  }
  return bits;
}

TruthTable evaluate(const Formula& f, const std::array<TruthTable, kMaxAtoms>& columns) {
  TruthTable r{};
  switch (f.kind()) {
    case Connective::Atom: return columns[f.atom_index()];
    case Connective::Top: r.fill(~0ULL); return r;
    case Connective::Bottom: return r;
    default: break;
  }
  TruthTable a = evaluate(f.left(), columns);
  TruthTable b = evaluate(f.right(), columns);
  for (int w = 0; w < 4; ++w) {
    switch (f.kind()) {
      case Connective::And: r[w] = a[w] & b[w]; break;
      case Connective::Or: r[w] = a[w] | b[w]; break;
      default: r[w] = ~a[w] | b[w]; break;
    }
  }
  return r;
}

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).parse(); }

std::string render(const Formula& f) {
  std::string out;
  render_into(f, out);
  return out;
}

Formula final_conclusion(const Formula& f) {
  Formula cur = f;
  while (cur.is(Connective::Implies)) cur = cur.right();
  return cur;
}

TruthTable truth_table(const Formula& f, int atom_count) {
  static const std::array<TruthTable, kMaxAtoms> columns = [] {
    std::array<TruthTable, kMaxAtoms> cols{};
    for (int a = 0; a < kMaxAtoms; ++a)
      for (int w = 0; w < 4; ++w) cols[a][w] = atom_column(a, w);
    return cols;
  }();
  TruthTable t = evaluate(f, columns);
  const int rows = 1 << atom_count;
  for (int w = 0; w < 4; ++w) {
    int lo = w * 64;
    if (rows <= lo) {
      t[w] = 0;
    } else if (rows < lo + 64) {
      t[w] &= (1ULL << (rows - lo)) - 1;
    }
  }
  return t;
}

bool classically_valid(const Formula& f, int atom_count) {
  if ((f.atom_mask() >> atom_count) != 0) atom_count = kMaxAtoms;
  TruthTable t = truth_table(f, atom_count);
  const int rows = 1 << atom_count;
  for (int w = 0; w < 4; ++w) {
    int lo = w * 64;
    if (rows <= lo) break;
    std::uint64_t want = rows >= lo + 64 ? ~0ULL : (1ULL << (rows - lo)) - 1;
    if (t[w] != want) return false;
  }
  return true;
}

}  // namespace tacticrl
