#pragma once

#include "wf/size_stats.hpp"
#include "wf/trace.hpp"

namespace wf {

// Attacker side: build the top-X filter from a corpus of normal traffic,
// then drop every packet whose signed size is not on the list.

FilterList build_filter(const Dataset& corpus, int x);

// In-order subsequence of t whose signed sizes are in the list. May be
// empty; evaluation treats a zero-length filtered trace as unclassifiable.
Trace faa_filter(const Trace& t, const FilterList& list);

Dataset filter_dataset(const Dataset& ds, const FilterList& list);

}  // namespace wf
