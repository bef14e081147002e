#include "mrlab/query.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <optional>
#include <set>

#include "mrlab/errors.hpp"

namespace mrlab {

const RelationRef* ConjunctiveQuery::find(const std::string& relation) const {
  for (const auto& ref : relations)
    if (ref.name == relation) return &ref;
  return nullptr;
}

std::vector<QualifiedAttr> ConjunctiveQuery::attributes() const {
  std::vector<QualifiedAttr> all;
  for (const auto& ref : relations)
    for (const auto& attribute : ref.attributes) all.push_back({ref.name, attribute});
  return all;
}

namespace {

struct Token {
  enum class Kind { Ident, String, Number, Symbol, End } kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto begin = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      tokens.push_back({Token::Kind::Ident, text.substr(begin, i - begin), begin});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      const auto begin = i++;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      tokens.push_back({Token::Kind::Number, text.substr(begin, i - begin), begin});
    } else if (c == '\'') {
      const auto begin = i++;
      std::string value;
      while (true) {
        if (i >= text.size()) throw ParseError("unterminated string constant", begin);
        if (text[i] == '\'') {
          if (i + 1 < text.size() && text[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += text[i++];
      }
      tokens.push_back({Token::Kind::String, value, begin});
    } else if (c == '<' || c == '>' || c == '!') {
      const auto begin = i++;
      if (i < text.size() && (text[i] == '=' || text[i] == '>')) ++i;
      tokens.push_back({Token::Kind::Symbol, text.substr(begin, i - begin), begin});
    } else if (c == ',' || c == '.' || c == '=' || c == ';' || c == '(' || c == ')') {
      tokens.push_back({Token::Kind::Symbol, std::string(1, c), i++});
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  tokens.push_back({Token::Kind::End, "", text.size()});
  return tokens;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool is_keyword(const std::string& word) {
  static const std::set<std::string> keywords{"SELECT", "DISTINCT", "AS", "FROM", "WHERE", "AND", "OR", "NOT"};
  return keywords.count(upper(word)) > 0;
}

class QueryParser {
 public:
  QueryParser(const std::string& text, const SchemaLookup& lookup) : tokens_(tokenize(text)), lookup_(lookup) {}

  ConjunctiveQuery parse() {
    expect_keyword("SELECT");
    if (keyword("DISTINCT")) {
      q_.distinct = true;
    } else {
      q_.distinct = false;
    }
    std::vector<RawAttr> head;
    do {
      head.push_back(raw_attr());
      if (keyword("AS")) {
        if (peek().kind != Token::Kind::String && peek().kind != Token::Kind::Ident)
          fail("expected output column alias");
        ++at_;
      }
    } while (symbol(","));

    expect_keyword("FROM");
    do from_item();
    while (symbol(","));

    if (keyword("WHERE")) {
      do predicate();
      while (keyword("AND"));
    }
    symbol(";");
    if (peek().kind != Token::Kind::End) {
      if (peek().kind == Token::Kind::Ident && upper(peek().text) == "OR") fail("OR is not supported");
      fail("unexpected '" + peek().text + "'");
    }

    for (const auto& raw : head) q_.head.push_back(resolve(raw));
    for (const auto& [left, right] : pending_joins_) q_.joins.push_back({resolve(left), resolve(right)});
    for (const auto& [attr, constant] : pending_selections_) q_.selections.push_back({resolve(attr), constant});
    return q_;
  }

 private:
  struct RawAttr {
    std::optional<std::string> qualifier;
    std::string name;
    std::size_t pos;
  };

  const Token& peek() const { return tokens_[at_]; }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, peek().pos); }
  [[noreturn]] void fail_at(const std::string& message, std::size_t pos) const { throw ParseError(message, pos); }

  bool keyword(const char* word) {
    if (peek().kind == Token::Kind::Ident && upper(peek().text) == word) {
      ++at_;
      return true;
    }
    return false;
  }

  void expect_keyword(const char* word) {
    if (!keyword(word)) fail(std::string("expected ") + word);
  }

  bool symbol(const char* text) {
    if (peek().kind == Token::Kind::Symbol && peek().text == text) {
      ++at_;
      return true;
    }
    return false;
  }

  std::string identifier(const char* what) {
    if (peek().kind != Token::Kind::Ident || is_keyword(peek().text)) fail(std::string("expected ") + what);
    return tokens_[at_++].text;
  }

  RawAttr raw_attr() {
    RawAttr raw;
    raw.pos = peek().pos;
    raw.name = identifier("attribute");
    if (symbol(".")) {
      raw.qualifier = raw.name;
      raw.name = identifier("attribute");
    }
    return raw;
  }

  void from_item() {
    const auto pos = peek().pos;
    const std::string name = identifier("relation name");
    auto attributes = lookup_ ? lookup_(name) : std::nullopt;
    if (!attributes) fail_at("unknown relation " + name, pos);
    if (q_.find(name)) fail_at("relation " + name + " listed twice", pos);
    q_.relations.push_back({name, *attributes});
    std::string alias = name;
    if (keyword("AS")) {
      alias = identifier("alias");
    } else if (peek().kind == Token::Kind::Ident && !is_keyword(peek().text)) {
      alias = identifier("alias");
    }
    for (const auto& [existing, _] : aliases_)
      if (existing == alias) fail_at("alias " + alias + " used twice", pos);
    aliases_.push_back({alias, name});
    if (alias != name) aliases_.push_back({name, name});
  }

  void predicate() {
    if (peek().kind == Token::Kind::Ident && upper(peek().text) == "NOT") fail("NOT is not supported");
    std::optional<RawAttr> left_attr;
    std::optional<Value> left_value;
    operand(left_attr, left_value);
    const auto op_pos = peek().pos;
    if (!symbol("=")) {
      if (peek().kind == Token::Kind::Symbol && peek().text != "," && peek().text != ";")
        fail_at("only equality predicates are supported", op_pos);
      fail("expected '='");
    }
    std::optional<RawAttr> right_attr;
    std::optional<Value> right_value;
    operand(right_attr, right_value);
    if (left_attr && right_attr) {
      pending_joins_.push_back({*left_attr, *right_attr});
    } else if (left_attr) {
      pending_selections_.push_back({*left_attr, *right_value});
    } else if (right_attr) {
      pending_selections_.push_back({*right_attr, *left_value});
    } else {
      fail_at("predicate compares two constants", op_pos);
    }
  }

  void operand(std::optional<RawAttr>& attr, std::optional<Value>& value) {
    if (peek().kind == Token::Kind::String) {
      value = Value(tokens_[at_++].text);
    } else if (peek().kind == Token::Kind::Number) {
      value = parse_value(tokens_[at_++].text);
    } else {
      attr = raw_attr();
    }
  }

  QualifiedAttr resolve(const RawAttr& raw) const {
    if (raw.qualifier) {
      for (const auto& [alias, relation] : aliases_) {
        if (alias != *raw.qualifier) continue;
        const auto* ref = q_.find(relation);
        if (std::find(ref->attributes.begin(), ref->attributes.end(), raw.name) == ref->attributes.end())
          fail_at("relation " + relation + " has no attribute " + raw.name, raw.pos);
        return {relation, raw.name};
      }
      fail_at("unknown relation or alias " + *raw.qualifier, raw.pos);
    }
    std::optional<QualifiedAttr> found;
    for (const auto& ref : q_.relations) {
      if (std::find(ref.attributes.begin(), ref.attributes.end(), raw.name) == ref.attributes.end()) continue;
      if (found) fail_at("ambiguous attribute " + raw.name, raw.pos);
      found = QualifiedAttr{ref.name, raw.name};
    }
    if (!found) fail_at("unknown attribute " + raw.name, raw.pos);
    return *found;
  }

  std::vector<Token> tokens_;
  const SchemaLookup& lookup_;
  std::size_t at_ = 0;
  ConjunctiveQuery q_;
  std::vector<std::pair<std::string, std::string>> aliases_;
  std::vector<std::pair<RawAttr, RawAttr>> pending_joins_;
  std::vector<std::pair<RawAttr, Value>> pending_selections_;
};

}  // namespace

ConjunctiveQuery parse_query(const std::string& text, const SchemaLookup& lookup) {
  return QueryParser(text, lookup).parse();
}

std::string to_sql(const ConjunctiveQuery& q) {
  std::string out = q.distinct ? "SELECT DISTINCT " : "SELECT ";
  for (std::size_t i = 0; i < q.head.size(); ++i) out += (i ? ", " : "") + q.head[i].to_string();
  out += " FROM ";
  for (std::size_t i = 0; i < q.relations.size(); ++i) out += (i ? ", " : "") + q.relations[i].name;
  std::vector<std::string> predicates;
  for (const auto& join : q.joins) predicates.push_back(join.left.to_string() + " = " + join.right.to_string());
  for (const auto& sel : q.selections) predicates.push_back(sel.attr.to_string() + " = " + to_literal(sel.constant));
  for (std::size_t i = 0; i < predicates.size(); ++i) out += (i ? " AND " : " WHERE ") + predicates[i];
  return out;
}

std::map<QualifiedAttr, std::string> column_names(const ConjunctiveQuery& q) {
  const auto attrs = q.attributes();
  std::map<QualifiedAttr, std::size_t> index;
  for (std::size_t i = 0; i < attrs.size(); ++i) index[attrs[i]] = i;
  std::vector<std::size_t> parent(attrs.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& join : q.joins) {
    const auto a = find(index.at(join.left));
    const auto b = find(index.at(join.right));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::map<std::size_t, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < attrs.size(); ++i) classes[find(i)].push_back(i);

  std::map<QualifiedAttr, std::string> names;
  for (const auto& [root, members] : classes) {
    std::set<std::string> relations;
    for (auto m : members)
      if (!relations.insert(attrs[m].relation).second)
        throw SchemaError("join predicates equate two attributes of relation " + attrs[m].relation);
    const std::string& bare = attrs[root].attribute;
    bool unambiguous = std::all_of(members.begin(), members.end(), [&](auto m) { return attrs[m].attribute == bare; });
    for (std::size_t i = 0; unambiguous && i < attrs.size(); ++i)
      if (find(i) != root && attrs[i].attribute == bare) unambiguous = false;
    const std::string name = unambiguous ? bare : attrs[root].to_string();
    for (auto m : members) names[attrs[m]] = name;
  }
  return names;
}

std::vector<std::string> head_columns(const ConjunctiveQuery& q) {
  const auto names = column_names(q);
  std::vector<std::string> head;
  for (const auto& attr : q.head) {
    const auto& name = names.at(attr);
    if (std::find(head.begin(), head.end(), name) == head.end()) head.push_back(name);
  }
  return head;
}

Plan query_leaf(const ConjunctiveQuery& q, const std::string& relation) {
  const auto names = column_names(q);
  const auto* ref = q.find(relation);
  if (!ref) throw PlanError("query has no relation " + relation);
  std::vector<std::string> columns;
  for (const auto& attribute : ref->attributes) columns.push_back(names.at({relation, attribute}));
  Plan plan = make_scan(relation, ref->attributes, columns);
  for (const auto& sel : q.selections)
    if (sel.attr.relation == relation)
      plan = make_select(Condition{names.at(sel.attr), CompareOp::Eq, sel.constant}, plan);
  return plan;
}

Plan canonical_plan(const ConjunctiveQuery& q) {
  if (q.relations.empty()) throw PlanError("query has no relations");
  Plan plan = query_leaf(q, q.relations.front().name);
  for (std::size_t i = 1; i < q.relations.size(); ++i) plan = make_join(plan, query_leaf(q, q.relations[i].name));
  const auto head = head_columns(q);
  if (head != plan->columns) plan = make_project(head, plan);
  return plan;
}

}  // namespace mrlab
