#include "dcopt/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "dcopt/error.hpp"

namespace dcopt {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_csv(const std::vector<RoundTrace>& trace,
                      std::optional<double> reference_objective) {
  std::string out = "round,seconds,objA,objB,gap,bytes";
  if (reference_objective) out += ",subopt";
  out += "\n";
  char buf[64];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu", r.round);
    out += buf;
    out += ',';
    out += format_double(r.seconds);
    out += ',';
    out += format_double(r.objective_a);
    out += ',';
    out += format_double(r.objective_b);
    out += ',';
    out += format_double(r.gap);
    out += ',';
    std::snprintf(buf, sizeof buf, "%" PRIu64, r.bytes);
    out += buf;
    if (reference_objective) {
      out += ',';
      out += format_double(r.objective_a - *reference_objective);
    }
    out += '\n';
  }
  return out;
}

std::string trace_jsonl(const std::vector<RoundTrace>& trace,
                        std::optional<double> reference_objective) {
  std::string out;
  char buf[64];
  for (const auto& r : trace) {
    out += "{\"round\":";
    std::snprintf(buf, sizeof buf, "%zu", r.round);
    out += buf;
    out += ",\"seconds\":" + format_double(r.seconds);
    out += ",\"objA\":" + format_double(r.objective_a);
    out += ",\"objB\":" + format_double(r.objective_b);
    out += ",\"gap\":" + format_double(r.gap);
    std::snprintf(buf, sizeof buf, ",\"bytes\":%" PRIu64, r.bytes);
    out += buf;
    if (reference_objective)
      out += ",\"subopt\":" + format_double(r.objective_a -
                                            *reference_objective);
    out += "}\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw contract_error("cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw contract_error("write to " + path + " failed");
}

}  // namespace dcopt
