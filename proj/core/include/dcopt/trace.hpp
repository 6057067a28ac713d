#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcopt/engine.hpp"

namespace dcopt {

// Trace serialization. Header: round,seconds,objA,objB,gap,bytes. With a
// reference objective a trailing subopt column (objA - reference) is added.
// Doubles print as %.17g so reruns are byte-identical and values round-trip.
std::string trace_csv(const std::vector<RoundTrace>& trace,
                      std::optional<double> reference_objective = {});
std::string trace_jsonl(const std::vector<RoundTrace>& trace,
                        std::optional<double> reference_objective = {});

void write_text_file(const std::string& path, const std::string& content);

std::string format_double(double x);  // %.17g

}  // namespace dcopt
