#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tiersim {

// Stable numeric formatting for all text outputs (snprintf-backed so byte-identical
// output does not depend on the C++ library's locale or float-to-chars path).
std::string fmt_double(double v, int precision = 6);
std::string fmt_fixed(double v, int decimals);

// Shortest string that parses back to exactly v. Used by the writers whose output
// feeds a parser again (workload and calibration files), where truncation would
// silently change behaviour after a save/load cycle.
std::string fmt_double_rt(double v);

std::vector<std::string> split_ws(const std::string& line);
std::vector<std::string> split_char(const std::string& line, char sep);

// "key=value" token helpers used by the workload/experiment formats.
struct KvPairs {
    std::map<std::string, std::string> kv;
    std::string where; // origin:line carried into error messages

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    const std::string& get(const std::string& k) const;
    std::string get_or(const std::string& k, const std::string& dflt) const;
    double get_double(const std::string& k) const;
    double get_double_or(const std::string& k, double dflt) const;
    std::uint64_t get_u64(const std::string& k) const;
    std::uint64_t get_u64_or(const std::string& k, std::uint64_t dflt) const;
    bool get_bool_or(const std::string& k, bool dflt) const;
};

// Parses tokens[first..] of the form key=value; throws ParseError on malformed tokens.
KvPairs parse_kv(const std::vector<std::string>& tokens, std::size_t first,
                 const std::string& where);

double parse_double(const std::string& s, const std::string& where);
std::uint64_t parse_u64(const std::string& s, const std::string& where);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace tiersim
