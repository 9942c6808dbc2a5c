#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgefactor/common.hpp"

namespace edgefactor {

// Minimal TOML subset: [section] headers, key = value lines, # comments,
// basic strings with \\ \" \n \t escapes, integers, floats, booleans, and
// flat arrays of those. Keys are exposed flattened as "section.key".
class TomlTable {
public:
    struct Value;
    using Array = std::vector<Value>;

    struct Value {
        std::variant<std::string, long long, double, bool, Array> data;

        bool is_string() const { return std::holds_alternative<std::string>(data); }
        bool is_int() const { return std::holds_alternative<long long>(data); }
        bool is_double() const {
            return std::holds_alternative<double>(data) || is_int();
        }
        bool is_bool() const { return std::holds_alternative<bool>(data); }
        bool is_array() const { return std::holds_alternative<Array>(data); }

        const std::string& as_string() const { return std::get<std::string>(data); }
        long long as_int() const { return std::get<long long>(data); }
        double as_double() const {
            if (is_int())
                return double(std::get<long long>(data));
            return std::get<double>(data);
        }
        bool as_bool() const { return std::get<bool>(data); }
        const Array& as_array() const { return std::get<Array>(data); }
    };

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const Value* find(const std::string& key) const {
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    std::string get_string(const std::string& key, std::string fallback = {}) const {
        const Value* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_string())
            throw ValidationError("config key \"" + key + "\" is not a string");
        return v->as_string();
    }

    long long get_int(const std::string& key, long long fallback = 0) const {
        const Value* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_int())
            throw ValidationError("config key \"" + key + "\" is not an integer");
        return v->as_int();
    }

    double get_double(const std::string& key, double fallback = 0.0) const {
        const Value* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_double())
            throw ValidationError("config key \"" + key + "\" is not a number");
        return v->as_double();
    }

    bool get_bool(const std::string& key, bool fallback = false) const {
        const Value* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_bool())
            throw ValidationError("config key \"" + key + "\" is not a boolean");
        return v->as_bool();
    }

    std::vector<std::string> get_string_array(const std::string& key) const {
        const Value* v = find(key);
        if (!v)
            return {};
        if (!v->is_array())
            throw ValidationError("config key \"" + key + "\" is not an array");
        std::vector<std::string> out;
        for (const Value& e : v->as_array()) {
            if (!e.is_string())
                throw ValidationError("config key \"" + key + "\" is not a string array");
            out.push_back(e.as_string());
        }
        return out;
    }

    std::vector<long long> get_int_array(const std::string& key) const {
        const Value* v = find(key);
        if (!v)
            return {};
        if (!v->is_array())
            throw ValidationError("config key \"" + key + "\" is not an array");
        std::vector<long long> out;
        for (const Value& e : v->as_array()) {
            if (!e.is_int())
                throw ValidationError("config key \"" + key + "\" is not an integer array");
            out.push_back(e.as_int());
        }
        return out;
    }

    void set(const std::string& key, Value value) { values_[key] = std::move(value); }

    const std::map<std::string, Value>& entries() const { return values_; }

    static TomlTable parse(std::istream& in) {
        TomlTable table;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view sv = strip_comment(line);
            sv = trim(sv);
            if (sv.empty())
                continue;
            if (sv.front() == '[') {
                if (sv.back() != ']')
                    throw ValidationError(err(lineno, "unterminated section header"));
                section = std::string(trim(sv.substr(1, sv.size() - 2)));
                if (section.empty())
                    throw ValidationError(err(lineno, "empty section name"));
                continue;
            }
            std::size_t eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw ValidationError(err(lineno, "expected key = value"));
            std::string key(trim(sv.substr(0, eq)));
            if (key.empty() || !valid_key(key))
                throw ValidationError(err(lineno, "invalid key"));
            std::string_view raw = trim(sv.substr(eq + 1));
            if (raw.empty())
                throw ValidationError(err(lineno, "missing value"));
            std::string full = section.empty() ? key : section + "." + key;
            table.values_[full] = parse_value(raw, lineno);
        }
        return table;
    }

    static TomlTable parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ValidationError("cannot open config file " + path);
        return parse(in);
    }

private:
    static std::string err(std::size_t lineno, const char* what) {
        return "config line " + std::to_string(lineno) + ": " + what;
    }

    static bool valid_key(std::string_view key) {
        for (char c : key)
            if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-'))
                return false;
        return true;
    }

    // Drops a trailing # comment, honoring quoted strings.
    static std::string_view strip_comment(std::string_view line) {
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '#') {
                return line.substr(0, i);
            }
        }
        return line;
    }

    static Value parse_value(std::string_view raw, std::size_t lineno) {
        if (raw.front() == '"') {
            std::size_t end = 0;
            return Value{parse_string(raw, end, lineno)};
        }
        if (raw.front() == '[') {
            if (raw.back() != ']')
                throw ValidationError(err(lineno, "unterminated array"));
            Array arr;
            std::string_view body = trim(raw.substr(1, raw.size() - 2));
            std::size_t i = 0;
            while (i < body.size()) {
                while (i < body.size() && (body[i] == ' ' || body[i] == '\t' || body[i] == ','))
                    ++i;
                if (i >= body.size())
                    break;
                if (body[i] == '"') {
                    std::size_t end = 0;
                    arr.push_back(Value{parse_string(body.substr(i), end, lineno)});
                    i += end;
                } else {
                    std::size_t end = body.find(',', i);
                    if (end == std::string_view::npos)
                        end = body.size();
                    arr.push_back(parse_scalar(trim(body.substr(i, end - i)), lineno));
                    i = end;
                }
            }
            return Value{std::move(arr)};
        }
        return parse_scalar(raw, lineno);
    }

    static Value parse_scalar(std::string_view raw, std::size_t lineno) {
        if (raw == "true")
            return Value{true};
        if (raw == "false")
            return Value{false};
        bool looks_float = raw.find('.') != std::string_view::npos ||
                           raw.find('e') != std::string_view::npos ||
                           raw.find('E') != std::string_view::npos;
        if (!looks_float) {
            if (auto v = parse_int(raw))
                return Value{*v};
        }
        if (auto v = parse_double(raw))
            return Value{*v};
        throw ValidationError(err(lineno, "unrecognized value"));
    }

    static std::string parse_string(std::string_view raw, std::size_t& consumed,
                                    std::size_t lineno) {
        std::string out;
        std::size_t i = 1;
        while (i < raw.size()) {
            char c = raw[i];
            if (c == '"') {
                consumed = i + 1;
                return out;
            }
            if (c == '\\') {
                if (i + 1 >= raw.size())
                    break;
                char esc = raw[i + 1];
                switch (esc) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default:
                    throw ValidationError(err(lineno, "unsupported string escape"));
                }
                i += 2;
                continue;
            }
            out.push_back(c);
            ++i;
        }
        throw ValidationError(err(lineno, "unterminated string"));
    }

    std::map<std::string, Value> values_;
};

} // namespace edgefactor
