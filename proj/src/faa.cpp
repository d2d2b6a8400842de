#include "wf/faa.hpp"

#include "wf/defenses.hpp"

namespace wf {

FilterList build_filter(const Dataset& corpus, int x) {
    return top_x(build_histogram(corpus), x);
}

Trace faa_filter(const Trace& t, const FilterList& list) {
    if (list.sizes.empty()) throw EmptyFilterList{};
    Trace out;
    out.label = t.label;
    for (int s : t.sizes)
        if (list.contains(s)) out.sizes.push_back(s);
    return out;
}

Dataset filter_dataset(const Dataset& ds, const FilterList& list) {
    Dataset out;
    out.class_count = ds.class_count;
    out.open_world = ds.open_world;
    out.traces.reserve(ds.traces.size());
    for (const Trace& t : ds.traces) out.traces.push_back(faa_filter(t, list));
    return out;
}

}  // namespace wf
