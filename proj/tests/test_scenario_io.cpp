#include <gtest/gtest.h>

#include <sstream>

#include <robust_assoc/scenario_io.hpp>

using namespace robust_assoc;

namespace {

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_scenarios(in, "pack.ini");
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(TableRecords, CsvAndWhitespace) {
    EXPECT_EQ(parse_table_record("10,20,30,30,20,10", 1), GenotypeTable(10, 20, 30, 30, 20, 10));
    EXPECT_EQ(parse_table_record("10 20\t30  30 20 10", 1), GenotypeTable(10, 20, 30, 30, 20, 10));
    EXPECT_EQ(parse_table_record("10, 20, 30, 30, 20, 10\r", 1), GenotypeTable(10, 20, 30, 30, 20, 10));
}

TEST(TableRecords, MalformedRecordNamesLine) {
    try {
        parse_table_record("1 2", 7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("'1 2'"), std::string::npos);
    }
    EXPECT_THROW(parse_table_record("1 2 3 4 5 x", 1), Error);
    EXPECT_THROW(parse_table_record("1 2 3.5 4 5 6", 1), Error);
    try {
        parse_table_record("1 2 -3 4 5 6", 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NegativeCell);
    }
    try {
        parse_table_record("0 0 0 4 5 6", 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyRow);
    }
}

TEST(TableRecords, FileWithHeaderAndComments) {
    std::istringstream in("# comment\nr0,r1,r2,s0,s1,s2\n\n1,2,3,4,5,6\n  # note\n7 8 9 10 11 12\n");
    const auto recs = read_table_records(in);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].line, 4u);
    EXPECT_EQ(recs[1].table, GenotypeTable(7, 8, 9, 10, 11, 12));
}

TEST(Scenarios, ParsesAllForms) {
    std::istringstream in(R"(
# pack
[null]
p = 0.3
r = 250
s = 250

[dom]
model = dom
f0 = 0.01
f2 = 0.019
p = 0.1
r = 250
s = 250
sidedness = one
correction = off

[cal]
model = rec
calibrate = 0.8
p = 0.5
r = 50
s = 250

[mix]
model = custom
f1 = 0.015
f2 = 0.02
pA = 0.1
pB = 0.4
R1 = 250
R2 = 100
S1 = 250
S2 = 100
)");
    const auto sc = parse_scenarios(in);
    ASSERT_EQ(sc.size(), 4u);
    EXPECT_TRUE(sc[0].null_hypothesis);
    EXPECT_DOUBLE_EQ(sc[0].penetrance.f0, 0.01);
    EXPECT_EQ(sc[1].penetrance.kind, GeneticModel::Dominant);
    EXPECT_DOUBLE_EQ(sc[1].penetrance.f1, 0.019);
    EXPECT_EQ(sc[1].sidedness, Sidedness::OneSided);
    EXPECT_FALSE(sc[1].correction);
    EXPECT_EQ(sc[2].calibration_target, 0.8);
    EXPECT_EQ(sc[2].cases, 50);
    ASSERT_NE(sc[3].mixture(), nullptr);
    EXPECT_EQ(sc[3].cases, 350);
    EXPECT_EQ(sc[3].controls, 350);
    EXPECT_DOUBLE_EQ(sc[3].penetrance.f1, 0.015);
}

TEST(Scenarios, ValidationErrors) {
    EXPECT_NE(error_of("[a]\np = 1.2\nr = 10\ns = 10\n").find("pack.ini:1"), std::string::npos);
    EXPECT_NE(error_of("[a]\np = 0.2\nr = 10\ns = 10\ncolour = red\n").find("unknown key"), std::string::npos);
    EXPECT_NE(error_of("[a]\np = 0.2\np = 0.3\nr = 10\ns = 10\n").find("duplicate key"), std::string::npos);
    EXPECT_NE(error_of("[a]\np = 0.2\nr = 10\ns = 10\n[a]\np = 0.2\nr = 10\ns = 10\n").find("duplicate scenario"),
              std::string::npos);
    EXPECT_NE(error_of("[a]\nmodel = add\nf2 = 0.02\ncalibrate = 0.8\np = 0.2\nr = 10\ns = 10\n").find("exactly one"),
              std::string::npos);
    EXPECT_NE(error_of("[a]\nmodel = add\np = 0.2\nr = 10\ns = 10\n").find("exactly one"), std::string::npos);
    EXPECT_NE(error_of("[a]\nmodel = sex\np = 0.2\nr = 10\ns = 10\n").find("unknown model"), std::string::npos);
    EXPECT_NE(error_of("[a]\nmodel = add\nf2 = 0.005\np = 0.2\nr = 10\ns = 10\n").find("OrderViolation"),
              std::string::npos);
    EXPECT_NE(error_of("[a]\np = 0.2\nr = 0\ns = 10\n").find("positive integer"), std::string::npos);
    EXPECT_NE(error_of("[a]\npA = 0.2\npB = 0.3\nR1 = 5\nR2 = 5\nS1 = 5\nS2 = 5\nr = 11\n").find("sum"),
              std::string::npos);
    EXPECT_NE(error_of("r = 10\n").find("outside"), std::string::npos);
    EXPECT_NE(error_of("# nothing\n").find("no scenarios"), std::string::npos);
    EXPECT_NE(error_of("[a]\np = 0.2\nr = 10\ns = 10\ncorrection = maybe\n").find("on or off"), std::string::npos);
}

TEST(Scenarios, HashIsStableAndSensitive) {
    std::istringstream a("[x]\np = 0.3\nr = 250\ns = 250\n");
    std::istringstream b("[x]\np = 0.3\nr = 250\ns = 250\n");
    std::istringstream c("[x]\np = 0.3\nr = 250\ns = 251\n");
    const auto ha = scenario_hash(parse_scenarios(a));
    EXPECT_EQ(ha, scenario_hash(parse_scenarios(b)));
    EXPECT_NE(ha, scenario_hash(parse_scenarios(c)));
}

TEST(Scenarios, ShippedPacksLoad) {
    for (const char* name : {"table3", "table4", "table5", "table5_hwe", "table6", "table7", "null_small"}) {
        const auto path = std::string(ROBUST_ASSOC_SOURCE_DIR) + "/scenarios/" + name + ".ini";
        EXPECT_NO_THROW(load_scenarios(path)) << path;
    }
    EXPECT_THROW(load_scenarios("/nonexistent/pack.ini"), Error);
}
