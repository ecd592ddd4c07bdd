#include "nmrl/abbadingo.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace nmrl {

void write_abbadingo(std::ostream& out, const std::vector<Sample>& samples,
                     int alphabet_size) {
  long n_traces = 0;
  for (const Sample& s : samples) n_traces += s.weight;
  out << n_traces << ' ' << alphabet_size << '\n';
  for (const Sample& s : samples) {
    for (long rep = 0; rep < s.weight; ++rep) {
      out << (s.positive() ? 1 : 0) << ' ' << s.symbols.size();
      for (SymbolId sym : s.symbols) out << ' ' << sym;
      out << '\n';
    }
  }
}

AbbadingoFile read_abbadingo(std::istream& in) {
  AbbadingoFile file;
  long n_traces = 0;
  if (!(in >> n_traces >> file.alphabet_size))
    throw std::runtime_error("abbadingo: bad header");
  std::unordered_map<Word, std::size_t, WordHash> index;
  for (long i = 0; i < n_traces; ++i) {
    int label = 0;
    std::size_t len = 0;
    if (!(in >> label >> len))
      throw std::runtime_error("abbadingo: bad trace header");
    Sample s;
    s.symbols.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      if (!(in >> s.symbols[k]) || s.symbols[k] < 0 ||
          s.symbols[k] >= file.alphabet_size)
        throw std::runtime_error("abbadingo: bad symbol");
    }
    if (label == 1) s.firing_steps.push_back(static_cast<int>(len));
    auto it = index.find(s.symbols);
    if (it != index.end()) {
      Sample& prev = file.samples[it->second];
      if (prev.positive() != (label == 1))
        throw std::runtime_error("abbadingo: conflicting labels for a trace");
      prev.weight += 1;
    } else {
      index.emplace(s.symbols, file.samples.size());
      file.samples.push_back(std::move(s));
    }
  }
  return file;
}

std::vector<Sample> store_samples(const TraceStore& store, int type) {
  std::vector<Sample> out;
  out.reserve(store.positives(type).size() + store.negatives(type).size());
  for (const Sample& s : store.positives(type)) out.push_back(s);
  for (const Sample& s : store.negatives(type)) out.push_back(s);
  return out;
}

}  // namespace nmrl
