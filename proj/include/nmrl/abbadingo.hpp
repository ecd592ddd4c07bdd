#pragma once

#include <iosfwd>
#include <vector>

#include "nmrl/trace.hpp"

namespace nmrl {

struct AbbadingoFile {
  int alphabet_size = 0;
  std::vector<Sample> samples;  // deduplicated, weights merged
};

/// Abbadingo One layout: header `<num_traces> <alphabet_size>`, then per
/// trace `<label 0|1> <length> <sym_0> ... <sym_{n-1}>`. Weights are emitted
/// by repeating lines. Only end-of-word labels survive the format; interior
/// firing information does not.
void write_abbadingo(std::ostream& out, const std::vector<Sample>& samples,
                     int alphabet_size);
AbbadingoFile read_abbadingo(std::istream& in);

/// One reward type's stored samples (positives then negatives, store order).
std::vector<Sample> store_samples(const TraceStore& store, int type);

}  // namespace nmrl
