// Plist-XML checker in three stages: a recursive-descent XML reader, a
// plist structure check, and interpretation of the typed values.

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>

#include "gramfuzz/targets.hpp"

namespace gramfuzz::targets {

#define GRAMFUZZ_XML_BLOCKS(X)                                                  \
  X(entry, parse) X(empty_input, parse) X(bom, parse) X(decl_open, parse)      \
  X(decl_attr, parse) X(decl_version, parse) X(decl_encoding, parse)           \
  X(decl_standalone, parse) X(decl_unknown_attr, parse)                        \
  X(decl_unterminated, parse) X(misc_ws, parse) X(comment, parse)              \
  X(comment_unterminated, parse) X(pi, parse) X(pi_unterminated, parse)        \
  X(doctype, parse) X(doctype_subset, parse) X(doctype_unterminated, parse)    \
  X(elem_open, parse) X(elem_name, parse) X(elem_name_bad, parse)              \
  X(attr, parse) X(attr_dq, parse) X(attr_sq, parse) X(attr_missing_eq, parse) \
  X(attr_missing_quote, parse) X(attr_unterminated, parse)                     \
  X(elem_self_close, parse) X(elem_tag_unterminated, parse)                    \
  X(elem_content, parse) X(text, parse) X(text_ws_only, parse)                 \
  X(entity_named, parse) X(entity_decimal, parse) X(entity_hex, parse)         \
  X(entity_unknown, parse) X(entity_unterminated, parse) X(cdata, parse)       \
  X(cdata_unterminated, parse) X(close_tag, parse) X(close_mismatch, parse)    \
  X(unexpected_eof, parse) X(too_deep, parse) X(trailing_misc, parse)          \
  X(trailing_garbage, parse) X(no_root, parse) X(parse_ok, parse)              \
  X(chk_root_plist, check) X(chk_root_other, check) X(chk_version_ok, check)   \
  X(chk_version_missing, check) X(chk_version_other, check)                    \
  X(chk_empty_plist, check) X(chk_multi_value, check) X(chk_dict, check)       \
  X(chk_dict_key, check) X(chk_dict_key_empty, check)                          \
  X(chk_dict_missing_value, check) X(chk_dict_dup_key, check)                  \
  X(chk_dict_non_key, check) X(chk_array, check) X(chk_array_empty, check)     \
  X(chk_string, check) X(chk_integer, check) X(chk_real, check)                \
  X(chk_bool, check) X(chk_bool_not_empty, check) X(chk_date, check)           \
  X(chk_data, check) X(chk_unknown_element, check)                             \
  X(chk_element_attrs, check) X(chk_stray_text, check) X(chk_ok, check)        \
  X(ev_int_zero, eval) X(ev_int_pos, eval) X(ev_int_neg, eval)                 \
  X(ev_int_hex, eval) X(ev_int_bad, eval) X(ev_int_overflow, eval)             \
  X(ev_real, eval) X(ev_real_exp, eval) X(ev_real_special, eval)               \
  X(ev_real_bad, eval) X(ev_str_empty, eval) X(ev_str_short, eval)             \
  X(ev_str_long, eval) X(ev_str_nonascii, eval) X(ev_true, eval)               \
  X(ev_false, eval) X(ev_date_ok, eval) X(ev_date_bad, eval)                   \
  X(ev_data_empty, eval) X(ev_data_decode, eval) X(ev_data_ws, eval)           \
  X(ev_data_bad_char, eval) X(ev_data_bad_padding, eval)                       \
  X(ev_data_small, eval) X(ev_data_large, eval) X(ev_dict_small, eval)         \
  X(ev_dict_large, eval) X(ev_array_small, eval) X(ev_array_large, eval)       \
  X(ev_nested_deep, eval) X(ev_ok, eval)

namespace {

enum class XB : std::uint16_t {
#define GRAMFUZZ_ENUM(name, stage) name,
  GRAMFUZZ_XML_BLOCKS(GRAMFUZZ_ENUM)
#undef GRAMFUZZ_ENUM
};

}  // namespace

const std::vector<Block>& xml_blocks() {
  static const std::vector<Block> blocks = make_inventory({
#define GRAMFUZZ_LABEL(name, stage) {"xml." #name, Stage::stage},
      GRAMFUZZ_XML_BLOCKS(GRAMFUZZ_LABEL)
#undef GRAMFUZZ_LABEL
  });
  return blocks;
}

namespace {

struct XNode {
  bool is_text = false;
  std::string name;  // element name, or text content
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<std::unique_ptr<XNode>> kids;
};

struct Stop {};

class Reader {
 public:
  Reader(ByteView in, CoverageSink& cov)
      : in_(in), cov_(cov), ids_(xml_blocks()) {}

  void at(XB b) { cov_.hit(ids_[static_cast<std::size_t>(b)].id); }
  [[noreturn]] void fail(XB b) {
    at(b);
    throw Stop{};
  }

  std::unique_ptr<XNode> document() {
    at(XB::entry);
    if (in_.empty()) fail(XB::empty_input);
    if (in_.starts_with("\xEF\xBB\xBF")) {
      at(XB::bom);
      i_ = 3;
    }
    if (rest().starts_with("<?xml")) declaration();
    std::unique_ptr<XNode> root;
    while (true) {
      skip_ws();
      if (eof()) break;
      if (rest().starts_with("<!--")) {
        comment();
      } else if (rest().starts_with("<?")) {
        pi();
      } else if (rest().starts_with("<!DOCTYPE")) {
        doctype();
      } else if (peek() == '<' && !root) {
        root = element(0);
      } else if (root) {
        fail(XB::trailing_garbage);
      } else {
        fail(XB::no_root);
      }
      if (root && !eof()) at(XB::trailing_misc);
    }
    if (!root) fail(XB::no_root);
    at(XB::parse_ok);
    return root;
  }

 private:
  ByteView rest() const { return in_.substr(i_); }
  bool eof() const { return i_ >= in_.size(); }
  char peek() const { return in_[i_]; }
  static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
  static bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
  }
  static bool name_char(char c) {
    return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
           c == '.';
  }

  void skip_ws() {
    bool any = false;
    while (!eof() && is_ws(peek())) {
      ++i_;
      any = true;
    }
    if (any) at(XB::misc_ws);
  }

  std::string name(XB bad) {
    if (eof() || !name_start(peek())) fail(bad);
    std::size_t b = i_;
    while (!eof() && name_char(peek())) ++i_;
    return std::string(in_.substr(b, i_ - b));
  }

  std::pair<std::string, std::string> attribute() {
    at(XB::attr);
    std::string n = name(XB::elem_name_bad);
    skip_ws();
    if (eof() || peek() != '=') fail(XB::attr_missing_eq);
    ++i_;
    skip_ws();
    if (eof() || (peek() != '"' && peek() != '\'')) fail(XB::attr_missing_quote);
    char q = peek();
    at(q == '"' ? XB::attr_dq : XB::attr_sq);
    std::size_t b = ++i_;
    while (!eof() && peek() != q) {
      if (peek() == '<') fail(XB::attr_unterminated);
      ++i_;
    }
    if (eof()) fail(XB::attr_unterminated);
    std::string v(in_.substr(b, i_ - b));
    ++i_;
    return {n, v};
  }

  void declaration() {
    at(XB::decl_open);
    i_ += 5;
    while (true) {
      skip_ws();
      if (eof()) fail(XB::decl_unterminated);
      if (rest().starts_with("?>")) {
        i_ += 2;
        return;
      }
      auto [n, v] = attribute();
      at(XB::decl_attr);
      if (n == "version")
        at(XB::decl_version);
      else if (n == "encoding")
        at(XB::decl_encoding);
      else if (n == "standalone")
        at(XB::decl_standalone);
      else
        at(XB::decl_unknown_attr);
    }
  }

  void comment() {
    at(XB::comment);
    std::size_t e = in_.find("-->", i_ + 4);
    if (e == ByteView::npos) fail(XB::comment_unterminated);
    i_ = e + 3;
  }

  void pi() {
    at(XB::pi);
    std::size_t e = in_.find("?>", i_ + 2);
    if (e == ByteView::npos) fail(XB::pi_unterminated);
    i_ = e + 2;
  }

  void doctype() {
    at(XB::doctype);
    i_ += 9;
    while (!eof() && peek() != '>') {
      if (peek() == '[') {
        at(XB::doctype_subset);
        std::size_t e = in_.find(']', i_);
        if (e == ByteView::npos) fail(XB::doctype_unterminated);
        i_ = e;
      }
      ++i_;
    }
    if (eof()) fail(XB::doctype_unterminated);
    ++i_;
  }

  void reference(std::string& text) {
    std::size_t e = in_.find(';', i_);
    if (e == ByteView::npos || e - i_ > 12) fail(XB::entity_unterminated);
    ByteView ref = in_.substr(i_ + 1, e - i_ - 1);
    i_ = e + 1;
    if (ref.starts_with("#x")) {
      at(XB::entity_hex);
      unsigned long v = std::strtoul(std::string(ref.substr(2)).c_str(), nullptr, 16);
      text += static_cast<char>(v & 0x7f);
    } else if (ref.starts_with("#")) {
      at(XB::entity_decimal);
      unsigned long v = std::strtoul(std::string(ref.substr(1)).c_str(), nullptr, 10);
      text += static_cast<char>(v & 0x7f);
    } else {
      static const std::map<std::string, char, std::less<>> named = {
          {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}};
      auto it = named.find(ref);
      if (it == named.end()) fail(XB::entity_unknown);
      at(XB::entity_named);
      text += it->second;
    }
  }

  void flush_text(XNode& parent, std::string& text) {
    if (text.empty()) return;
    bool ws_only = true;
    for (char c : text) ws_only = ws_only && is_ws(c);
    if (ws_only) {
      at(XB::text_ws_only);
    } else {
      at(XB::text);
      auto t = std::make_unique<XNode>();
      t->is_text = true;
      t->name = text;
      parent.kids.push_back(std::move(t));
    }
    text.clear();
  }

  std::unique_ptr<XNode> element(int depth) {
    if (depth > 48) fail(XB::too_deep);
    at(XB::elem_open);
    ++i_;
    auto node = std::make_unique<XNode>();
    node->name = name(XB::elem_name_bad);
    at(XB::elem_name);
    while (true) {
      skip_ws();
      if (eof()) fail(XB::elem_tag_unterminated);
      if (rest().starts_with("/>")) {
        at(XB::elem_self_close);
        i_ += 2;
        return node;
      }
      if (peek() == '>') {
        ++i_;
        break;
      }
      node->attrs.push_back(attribute());
    }
    at(XB::elem_content);
    std::string text;
    while (true) {
      if (eof()) fail(XB::unexpected_eof);
      if (rest().starts_with("</")) {
        flush_text(*node, text);
        i_ += 2;
        std::string closing = name(XB::elem_name_bad);
        skip_ws();
        if (eof() || peek() != '>') fail(XB::elem_tag_unterminated);
        ++i_;
        if (closing != node->name) fail(XB::close_mismatch);
        at(XB::close_tag);
        return node;
      }
      if (rest().starts_with("<!--")) {
        comment();
      } else if (rest().starts_with("<![CDATA[")) {
        at(XB::cdata);
        std::size_t e = in_.find("]]>", i_ + 9);
        if (e == ByteView::npos) fail(XB::cdata_unterminated);
        text += in_.substr(i_ + 9, e - i_ - 9);
        i_ = e + 3;
      } else if (rest().starts_with("<?")) {
        pi();
      } else if (peek() == '<') {
        flush_text(*node, text);
        node->kids.push_back(element(depth + 1));
      } else if (peek() == '&') {
        reference(text);
      } else {
        text += peek();
        ++i_;
      }
    }
  }

  ByteView in_;
  std::size_t i_ = 0;
  CoverageSink& cov_;
  const std::vector<Block>& ids_;
};

// Stage 2 and 3 share the reader's hit helper through this wrapper.
class Plist {
 public:
  Plist(Reader& r, CoverageSink& cov) : r_(r), cov_(cov) {}

  void check(const XNode& root) {
    if (root.name != "plist") r_.fail(XB::chk_root_other);
    r_.at(XB::chk_root_plist);
    bool has_version = false;
    for (const auto& [k, v] : root.attrs) {
      if (k != "version") continue;
      has_version = true;
      r_.at(v == "1.0" ? XB::chk_version_ok : XB::chk_version_other);
    }
    if (!has_version) r_.at(XB::chk_version_missing);
    std::size_t values = 0;
    for (const auto& k : root.kids) {
      if (k->is_text) r_.fail(XB::chk_stray_text);
      ++values;
    }
    if (values == 0) r_.fail(XB::chk_empty_plist);
    if (values > 1) r_.fail(XB::chk_multi_value);
    check_value(*root.kids.front());
    r_.at(XB::chk_ok);
  }

  void eval(const XNode& root) {
    eval_value(*root.kids.front(), 0);
    r_.at(XB::ev_ok);
  }

 private:
  static std::string text_of(const XNode& n) {
    std::string s;
    for (const auto& k : n.kids)
      if (k->is_text) s += k->name;
    return s;
  }

  void check_leaf(const XNode& n) {
    for (const auto& k : n.kids)
      if (!k->is_text) r_.fail(XB::chk_unknown_element);
  }

  void check_value(const XNode& n) {
    if (!n.attrs.empty()) r_.at(XB::chk_element_attrs);
    const std::string& t = n.name;
    if (t == "dict") {
      r_.at(XB::chk_dict);
      std::set<std::string> keys;
      bool want_key = true;
      for (const auto& k : n.kids) {
        if (k->is_text) r_.fail(XB::chk_stray_text);
        if (want_key) {
          if (k->name != "key") r_.fail(XB::chk_dict_non_key);
          check_leaf(*k);
          std::string key = text_of(*k);
          r_.at(key.empty() ? XB::chk_dict_key_empty : XB::chk_dict_key);
          if (!keys.insert(key).second) r_.fail(XB::chk_dict_dup_key);
        } else {
          if (k->name == "key") r_.fail(XB::chk_dict_missing_value);
          check_value(*k);
        }
        want_key = !want_key;
      }
      if (!want_key) r_.fail(XB::chk_dict_missing_value);
    } else if (t == "array") {
      r_.at(XB::chk_array);
      if (n.kids.empty()) r_.at(XB::chk_array_empty);
      for (const auto& k : n.kids) {
        if (k->is_text) r_.fail(XB::chk_stray_text);
        check_value(*k);
      }
    } else if (t == "string" || t == "integer" || t == "real" || t == "date" ||
               t == "data") {
      check_leaf(n);
      r_.at(t == "string"    ? XB::chk_string
            : t == "integer" ? XB::chk_integer
            : t == "real"    ? XB::chk_real
            : t == "date"    ? XB::chk_date
                             : XB::chk_data);
    } else if (t == "true" || t == "false") {
      if (!n.kids.empty()) r_.fail(XB::chk_bool_not_empty);
      r_.at(XB::chk_bool);
    } else {
      r_.fail(XB::chk_unknown_element);
    }
  }

  void eval_value(const XNode& n, int depth) {
    if (depth == 8) r_.at(XB::ev_nested_deep);
    const std::string& t = n.name;
    std::string s = text_of(n);
    if (t == "dict") {
      r_.at(n.kids.size() / 2 <= 4 ? XB::ev_dict_small : XB::ev_dict_large);
      for (std::size_t i = 1; i < n.kids.size(); i += 2) eval_value(*n.kids[i], depth + 1);
    } else if (t == "array") {
      r_.at(n.kids.size() <= 4 ? XB::ev_array_small : XB::ev_array_large);
      for (const auto& k : n.kids) eval_value(*k, depth + 1);
    } else if (t == "integer") {
      eval_integer(s);
    } else if (t == "real") {
      eval_real(s);
    } else if (t == "string") {
      if (s.empty()) {
        r_.at(XB::ev_str_empty);
      } else {
        r_.at(s.size() <= 16 ? XB::ev_str_short : XB::ev_str_long);
        for (unsigned char c : s)
          if (c >= 0x80) {
            r_.at(XB::ev_str_nonascii);
            break;
          }
      }
    } else if (t == "true") {
      r_.at(XB::ev_true);
    } else if (t == "false") {
      r_.at(XB::ev_false);
    } else if (t == "date") {
      eval_date(s);
    } else if (t == "data") {
      eval_data(s);
    }
  }

  void eval_integer(const std::string& s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    int base = 10;
    if (s.compare(i, 2, "0x") == 0) {
      r_.at(XB::ev_int_hex);
      base = 16;
      i += 2;
    }
    if (i == s.size()) {
      r_.at(XB::ev_int_bad);
      return;
    }
    std::uint64_t v = 0;
    for (; i < s.size(); ++i) {
      int d = std::isdigit(static_cast<unsigned char>(s[i])) ? s[i] - '0'
              : base == 16 && std::isxdigit(static_cast<unsigned char>(s[i]))
                  ? std::tolower(s[i]) - 'a' + 10
                  : -1;
      if (d < 0) {
        r_.at(XB::ev_int_bad);
        return;
      }
      if (v > (UINT64_MAX - static_cast<unsigned>(d)) / static_cast<unsigned>(base)) {
        r_.at(XB::ev_int_overflow);
        return;
      }
      v = v * static_cast<unsigned>(base) + static_cast<unsigned>(d);
    }
    r_.at(v == 0 ? XB::ev_int_zero : neg ? XB::ev_int_neg : XB::ev_int_pos);
  }

  void eval_real(const std::string& s) {
    if (s == "nan" || s == "inf" || s == "-inf" || s == "+inf") {
      r_.at(XB::ev_real_special);
      return;
    }
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
      r_.at(XB::ev_real_bad);
      return;
    }
    r_.at(s.find_first_of("eE") != std::string::npos ? XB::ev_real_exp : XB::ev_real);
  }

  void eval_date(const std::string& s) {
    // YYYY-MM-DDTHH:MM:SSZ
    static const char* shape = "dddd-dd-ddTdd:dd:ddZ";
    bool ok = s.size() == 20;
    for (std::size_t i = 0; ok && i < 20; ++i)
      ok = shape[i] == 'd' ? std::isdigit(static_cast<unsigned char>(s[i])) != 0
                           : s[i] == shape[i];
    if (ok) {
      int month = std::atoi(s.substr(5, 2).c_str());
      int day = std::atoi(s.substr(8, 2).c_str());
      ok = month >= 1 && month <= 12 && day >= 1 && day <= 31;
    }
    r_.at(ok ? XB::ev_date_ok : XB::ev_date_bad);
  }

  void eval_data(const std::string& s) {
    std::string digits;
    for (char c : s) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        r_.at(XB::ev_data_ws);
        continue;
      }
      digits += c;
    }
    if (digits.empty()) {
      r_.at(XB::ev_data_empty);
      return;
    }
    if (digits.size() % 4 != 0) {
      r_.at(XB::ev_data_bad_padding);
      return;
    }
    std::size_t decoded = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      char c = digits[i];
      bool pad = c == '=';
      if (pad && i + 2 < digits.size()) {
        r_.at(XB::ev_data_bad_padding);
        return;
      }
      if (!pad && !std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '/') {
        r_.at(XB::ev_data_bad_char);
        return;
      }
      if (!pad && i % 4 != 0) ++decoded;
    }
    r_.at(XB::ev_data_decode);
    r_.at(decoded <= 8 ? XB::ev_data_small : XB::ev_data_large);
    if (decoded == 13) cov_.crash("xml-data-length-13");
  }

  Reader& r_;
  CoverageSink& cov_;
};

}  // namespace

void toy_xml_target(ByteView input, CoverageSink& cov) {
  Reader reader(input, cov);
  std::unique_ptr<XNode> root;
  try {
    root = reader.document();
    Plist p(reader, cov);
    p.check(*root);
    p.eval(*root);
  } catch (const Stop&) {
  }
}

}  // namespace gramfuzz::targets
