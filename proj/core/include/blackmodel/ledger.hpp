#ifndef BLACKMODEL_LEDGER_HPP
#define BLACKMODEL_LEDGER_HPP

#include <string>
#include <vector>

namespace blackmodel::ledger {

// A conflict inside the published measurements themselves. Both readings
// are kept verbatim in the calibration; nothing is reconciled silently.
struct Entry {
    std::string id;
    std::string description;
    std::string value_a;
    std::string anchor_a; // reference table / discussion the value comes from
    std::string value_b;
    std::string anchor_b;
};

const std::vector<Entry>& entries();

} // namespace blackmodel::ledger

#endif
