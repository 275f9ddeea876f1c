#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "soblab/numeric.hpp"

namespace soblab {

/// Minimal streaming JSON emitter with deterministic number formatting
/// (17 significant digits). Non-finite values are emitted as the strings
/// "inf", "-inf", "nan" since JSON has no literals for them.
class JsonWriter {
public:
  JsonWriter& begin_object() {
    comma();
    out_ += '{';
    stack_.push_back(true);
    return *this;
  }
  JsonWriter& end_object() {
    out_ += '}';
    stack_.pop_back();
    return *this;
  }
  JsonWriter& begin_array() {
    comma();
    out_ += '[';
    stack_.push_back(true);
    return *this;
  }
  JsonWriter& end_array() {
    out_ += ']';
    stack_.pop_back();
    return *this;
  }
  JsonWriter& key(std::string_view k) {
    comma();
    quote(k);
    out_ += ':';
    pending_value_ = true;
    return *this;
  }
  JsonWriter& value(double x) {
    comma();
    if (std::isnan(x)) {
      out_ += "\"nan\"";
    } else if (std::isinf(x)) {
      out_ += x > 0 ? "\"inf\"" : "\"-inf\"";
    } else {
      out_ += num::fmt_g17(x);
    }
    return *this;
  }
  JsonWriter& value(std::int64_t x) {
    comma();
    out_ += std::to_string(x);
    return *this;
  }
  JsonWriter& value(int x) { return value(static_cast<std::int64_t>(x)); }
  JsonWriter& value(std::size_t x) { return value(static_cast<std::int64_t>(x)); }
  JsonWriter& value(bool b) {
    comma();
    out_ += b ? "true" : "false";
    return *this;
  }
  JsonWriter& value(std::string_view s) {
    comma();
    quote(s);
    return *this;
  }
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& null() {
    comma();
    out_ += "null";
    return *this;
  }
  /// Embed an already-serialized JSON value verbatim.
  JsonWriter& raw(std::string_view json) {
    comma();
    out_ += json;
    return *this;
  }

  template <class T>
  JsonWriter& kv(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }
  JsonWriter& kv_null(std::string_view k) {
    key(k);
    return null();
  }

  const std::string& str() const { return out_; }

private:
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!stack_.empty()) {
      if (!stack_.back()) out_ += ',';
      stack_.back() = false;
    }
  }
  void quote(std::string_view s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<bool> stack_;   // per open container: "no element emitted yet"
  bool pending_value_ = false;
};

}  // namespace soblab
