#include "mrlab/plan.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mrlab/errors.hpp"

namespace mrlab {

namespace {

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

bool contains(const std::vector<std::string>& items, const std::string& item) {
  return std::find(items.begin(), items.end(), item) != items.end();
}

}  // namespace

Plan make_scan(const std::string& relation, const std::vector<std::string>& base_attributes,
               std::vector<std::string> columns) {
  if (columns.empty()) columns = base_attributes;
  if (columns.size() != base_attributes.size())
    throw PlanError("scan " + relation + " renames " + std::to_string(base_attributes.size()) +
                    " attributes to " + std::to_string(columns.size()) + " columns");
  if (std::set<std::string>(columns.begin(), columns.end()).size() != columns.size())
    throw PlanError("scan " + relation + " has duplicate columns");
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanNode::Kind::Scan;
  node->relation = relation;
  node->base_attributes = base_attributes;
  node->columns = std::move(columns);
  return node;
}

Plan make_select(Condition condition, Plan child) {
  for (const auto& name : condition.attributes())
    if (!contains(child->columns, name)) throw PlanError("selection on unknown column " + name);
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanNode::Kind::Select;
  node->columns = child->columns;
  node->condition = std::move(condition);
  node->left = std::move(child);
  return node;
}

Plan make_project(std::vector<std::string> columns, Plan child) {
  if (std::set<std::string>(columns.begin(), columns.end()).size() != columns.size())
    throw PlanError("projection lists a column twice");
  for (const auto& name : columns)
    if (!contains(child->columns, name)) throw PlanError("projection on unknown column " + name);
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanNode::Kind::Project;
  node->columns = std::move(columns);
  node->left = std::move(child);
  return node;
}

Plan make_join(Plan left, Plan right) {
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanNode::Kind::Join;
  node->columns = left->columns;
  for (const auto& name : right->columns) {
    if (contains(left->columns, name))
      node->join_on.push_back(name);
    else
      node->columns.push_back(name);
  }
  std::sort(node->join_on.begin(), node->join_on.end());
  node->left = std::move(left);
  node->right = std::move(right);
  return node;
}

std::string serialize(const Plan& plan) {
  switch (plan->kind) {
    case PlanNode::Kind::Scan:
      if (plan->columns == plan->base_attributes) return "scan " + plan->relation;
      return "scan " + plan->relation + " as (" + join_list(plan->columns) + ")";
    case PlanNode::Kind::Select:
      return "select[" + to_string(plan->condition) + "](" + serialize(plan->left) + ")";
    case PlanNode::Kind::Project:
      return "project[" + join_list(plan->columns) + "](" + serialize(plan->left) + ")";
    case PlanNode::Kind::Join:
      return "join[" + join_list(plan->join_on) + "](" + serialize(plan->left) + ", " +
             serialize(plan->right) + ")";
  }
  return {};
}

namespace {

class PlanParser {
 public:
  PlanParser(const std::string& text, const SchemaLookup& lookup) : text_(text), lookup_(lookup) {}

  Plan parse() {
    Plan plan = node();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text");
    return plan;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  // Builder errors become parse errors at the start of the offending node.
  template <class Build>
  Plan checked(std::size_t at, Build&& build) const {
    try {
      return build();
    } catch (const PlanError& e) {
      throw ParseError(e.what(), at);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), at);
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  }

  std::string identifier() {
    skip_space();
    const auto begin = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_]) && !(text_[pos_] == '-' && pos_ == begin)) ++pos_;
    if (pos_ == begin) fail("expected identifier");
    return text_.substr(begin, pos_ - begin);
  }

  std::vector<std::string> list(char open, char close) {
    expect(open);
    std::vector<std::string> items;
    if (accept(close)) return items;
    do items.push_back(identifier());
    while (accept(','));
    expect(close);
    return items;
  }

  Value constant() {
    skip_space();
    if (accept('\'')) {
      std::string out;
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated string constant");
        const char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            out += '\'';
            ++pos_;
            continue;
          }
          break;
        }
        out += c;
      }
      return out;
    }
    const auto begin = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == begin || text_.substr(begin, pos_ - begin) == "-") fail("expected constant");
    return parse_value(text_.substr(begin, pos_ - begin));
  }

  CompareOp compare_op() {
    skip_space();
    static const std::pair<const char*, CompareOp> ops[] = {
        {"<=", CompareOp::Le}, {">=", CompareOp::Ge}, {"!=", CompareOp::Ne}, {"<>", CompareOp::Ne},
        {"=", CompareOp::Eq},  {"<", CompareOp::Lt},  {">", CompareOp::Gt}};
    for (const auto& [token, op] : ops) {
      if (text_.compare(pos_, std::char_traits<char>::length(token), token) == 0) {
        pos_ += std::char_traits<char>::length(token);
        return op;
      }
    }
    fail("expected comparison operator");
  }

  Condition condition() {
    Condition cond;
    cond.lhs = identifier();
    cond.op = compare_op();
    skip_space();
    if (pos_ < text_.size() && (text_[pos_] == '\'' || text_[pos_] == '-' ||
                                std::isdigit(static_cast<unsigned char>(text_[pos_]))))
      cond.rhs = constant();
    else
      cond.rhs = AttrRef{identifier()};
    return cond;
  }

  Plan node() {
    const auto start = (skip_space(), pos_);
    const std::string keyword = identifier();
    if (keyword == "scan") {
      const std::string relation = identifier();
      auto base = lookup_ ? lookup_(relation) : std::nullopt;
      if (!base) {
        pos_ = start;
        fail("unknown relation " + relation);
      }
      std::vector<std::string> columns;
      skip_space();
      if (text_.compare(pos_, 2, "as") == 0 && pos_ + 2 < text_.size() && !ident_char(text_[pos_ + 2])) {
        pos_ += 2;
        columns = list('(', ')');
      }
      return checked(start, [&] { return make_scan(relation, *base, columns); });
    }
    if (keyword == "select") {
      expect('[');
      Condition cond = condition();
      expect(']');
      expect('(');
      Plan child = node();
      expect(')');
      return checked(start, [&] { return make_select(std::move(cond), std::move(child)); });
    }
    if (keyword == "project") {
      auto columns = list('[', ']');
      expect('(');
      Plan child = node();
      expect(')');
      return checked(start, [&] { return make_project(std::move(columns), std::move(child)); });
    }
    if (keyword == "join") {
      const auto on_pos = pos_;
      auto on = list('[', ']');
      expect('(');
      Plan left = node();
      expect(',');
      Plan right = node();
      expect(')');
      Plan joined = checked(start, [&] { return make_join(std::move(left), std::move(right)); });
      std::sort(on.begin(), on.end());
      if (on != joined->join_on) {
        pos_ = on_pos;
        fail("join columns must be exactly the shared columns [" + join_list(joined->join_on) + "]");
      }
      return joined;
    }
    pos_ = start;
    fail("unknown plan operator '" + keyword + "'");
  }

  const std::string& text_;
  const SchemaLookup& lookup_;
  std::size_t pos_ = 0;
};

}  // namespace

Plan parse_plan(const std::string& text, const SchemaLookup& lookup) { return PlanParser(text, lookup).parse(); }

std::optional<std::string> builtin_plan_text(const std::string& name) {
  if (name == "P1") return "project[did,rid](join[did,rid](join[](scan Rank, scan Dept), scan Emp))";
  if (name == "P2")
    return "join[rid](join[did](project[did,rid](scan Emp), project[did](scan Dept)), project[rid](scan Rank))";
  return std::nullopt;
}

std::vector<std::string> plan_relations(const Plan& plan) {
  if (plan->kind == PlanNode::Kind::Scan) return {plan->relation};
  auto names = plan_relations(plan->left);
  if (plan->right) {
    auto more = plan_relations(plan->right);
    names.insert(names.end(), more.begin(), more.end());
  }
  return names;
}

bool same_plan(const Plan& a, const Plan& b) { return serialize(a) == serialize(b); }

std::size_t count_joins(const Plan& plan) {
  if (plan->kind == PlanNode::Kind::Scan) return 0;
  return (plan->kind == PlanNode::Kind::Join ? 1 : 0) + count_joins(plan->left) +
         (plan->right ? count_joins(plan->right) : 0);
}

}  // namespace mrlab
