#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "blackmodel/errors.hpp"
#include "blackmodel/ledger.hpp"
#include "blackmodel/tables.hpp"

using namespace blackmodel;
using namespace blackmodel::tables;

namespace {
const CalibrationSet& cal() {
    static CalibrationSet c = CalibrationSet::builtin();
    return c;
}
} // namespace

TEST_CASE("every bundled reference table reproduces (the golden suite)") {
    for (const std::string& id : table_ids()) {
        ComparisonReport r = reproduce(cal(), id);
        INFO(id << " worst=" << r.worst_cell << " max_rel_error=" << r.max_rel_error);
        CHECK(r.pass);
    }
}

TEST_CASE("pure-lookup tables reproduce exactly") {
    for (const std::string& id : {"T1", "T4", "T5", "T6", "T14"}) {
        ComparisonReport r = reproduce(cal(), id);
        INFO(id);
        CHECK(r.max_rel_error <= 1e-9);
    }
}

TEST_CASE("identity-bound tables stay inside their documented tolerances") {
    CHECK(reproduce(cal(), "T2").max_rel_error <= 0.015 + 0.005); // latency cells allow 2%
    ComparisonReport t2 = reproduce(cal(), "T2");
    for (const CellComparison& c : t2.cells)
        if (c.column == "input_gbps") CHECK(c.rel_error <= 0.015);
    CHECK(reproduce(cal(), "T3").max_rel_error <= 0.02);
    CHECK(reproduce(cal(), "T9").max_rel_error <= 0.02);
    CHECK(reproduce(cal(), "T10").max_rel_error <= 0.01);
}

TEST_CASE("reference tables parse with the expected shapes") {
    CHECK(builtin_table("T1").rows.size() == 7);
    CHECK(builtin_table("T3").rows.size() == 4);
    CHECK(builtin_table("T7").rows.size() == 9);
    CHECK(builtin_table("T8").rows.size() == 8);
    CHECK(builtin_table("T9").rows.size() == 6);
    CHECK(builtin_table("T10").rows.size() == 11);
    CHECK(builtin_table("T13").rows.size() == 4);
    CHECK_THROWS_AS(builtin_table("T99"), UnknownFormat);
}

TEST_CASE("N/A propagates: cells the baseline cannot produce stay N/A") {
    ComparisonReport t7 = reproduce(cal(), "T7");
    int na_pairs = 0;
    for (const CellComparison& c : t7.cells) {
        if ((c.row_key == "FP4" || c.row_key == "FP6") && c.column == "h200") {
            CHECK(c.model.kind == Cell::Kind::na);
            CHECK(c.pass);
            ++na_pairs;
        }
        if ((c.row_key == "FP4" || c.row_key == "FP6") && c.column == "speedup")
            CHECK(c.model.text == "New");
    }
    CHECK(na_pairs == 2);
}

TEST_CASE("quoted CSV cells keep their embedded commas") {
    ReferenceTable t = parse_reference_csv("TX", "a,b\n\"x, y\",2\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0].text == "x, y");
    CHECK(t.rows[0][1].num == 2.0);
}

TEST_CASE("a perturbed calibration fails reproduction and names the worst cell") {
    CalibrationSet broken = CalibrationSet::builtin();
    broken.specs.at("B200").tensor_peak.at(Precision::fp4).throughput = 7000.0;
    ComparisonReport r = reproduce(broken, "T7");
    CHECK(!r.pass);
    CHECK(r.worst_cell.find("FP4") != std::string::npos);
}

TEST_CASE("cell rendering is deterministic and locale-free") {
    CHECK(Cell::number_cell(36.2988).render() == "36.2988");
    CHECK(Cell::number_cell(7702.5).render() == "7702.5");
    CHECK(Cell::number_cell(112800).render() == "112800");
    CHECK(Cell::number_cell(0.019638).render() == "0.0196");
    CHECK(Cell::na().render() == "N/A");
    // Rendering twice yields identical bytes.
    ComparisonReport a = reproduce(cal(), "T9");
    ComparisonReport b = reproduce(cal(), "T9");
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i)
        CHECK(a.cells[i].model.render() == b.cells[i].model.render());
}

TEST_CASE("the inconsistency ledger records the documented calibration conflicts") {
    const std::vector<ledger::Entry>& e = ledger::entries();
    CHECK(e.size() >= 4);
    auto find = [&](const std::string& needle) {
        for (const ledger::Entry& entry : e) {
            std::string all = entry.id + " " + entry.description + " " + entry.value_a +
                              " " + entry.value_b;
            if (all.find(needle) != std::string::npos) return true;
        }
        return false;
    };
    CHECK(find("964.8"));    // instruction vs sustained 2x
    CHECK(find("1929.2"));
    CHECK(find("734264"));   // token-rate scale conflict
    CHECK(find("51200"));
    CHECK(find("1.744"));    // decomposition product vs measured
    CHECK(find("1.54-1.56"));
    CHECK(find("40 TFLOPS"));// stated vs derived FP64 peak
    CHECK(find("45.0"));
}
