#include "blackmodel/builtin_data.hpp"
#include "blackmodel/machine.hpp"

namespace blackmodel {

const std::string& builtin_spec_text(const std::string& name) {
    return builtin_machine_text(name);
}

std::vector<std::string> builtin_spec_names() { return {"B200", "H200"}; }

GpuSpec builtin_spec(const std::string& name) {
    return load_machine_file(builtin_machine_text(name));
}

CalibrationSet CalibrationSet::builtin() {
    CalibrationSet cal;
    for (const std::string& name : builtin_spec_names())
        cal.specs.emplace(name, builtin_spec(name));
    cal.provenance = {
        {"T1", "decomp.format.* (B200)"},
        {"T2", "decomp.sensitivity.* (B200)"},
        {"T3", "decomp.chunk.* (B200)"},
        {"T4", "static SASS opcode map"},
        {"T5", "tensor.latency.tcgen05 (B200) + tensor.latency.wgmma (H200)"},
        {"T6", "tensor.instr.* (B200)"},
        {"T7", "tensor.peak (both machines)"},
        {"T8", "llm.<model>.<precision> (both machines)"},
        {"T9", "llm.latency (both machines)"},
        {"T10", "summary over the per-workload operations"},
        {"T11", "training.<model>.<batch> (both machines)"},
        {"T12", "tensor.peak fp64 + dgemm efficiency anchors"},
        {"T13", "memory.stream_* (both machines)"},
        {"T14", "spmv.<matrix> (B200)"},
    };
    return cal;
}

} // namespace blackmodel
