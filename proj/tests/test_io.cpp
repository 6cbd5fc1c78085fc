#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "husimi/io.hpp"
#include "husimi/symbols.hpp"

using namespace husimi;

TEST(OperatorFormat, RoundTripIsExact) {
    for (auto A : {random_operator(7, 1, false), random_hermitian(9, 2), build_position(12), build_parity(5)}) {
        FockOperator B = parse_operator(write_operator(A));
        EXPECT_EQ(B.dim(), A.dim());
        EXPECT_TRUE((B.matrix().array() == A.matrix().array()).all());
        EXPECT_EQ(B.hermitian(), A.hermitian());
        EXPECT_EQ(B.truncated(), A.truncated());
    }
}

TEST(OperatorFormat, SpecRoundTrip) {
    for (std::string spec : {"number", "polynomial(1:2:0;1:0:2;0.5/-1:1:1)", "random-hermitian(42)", "momentum"}) {
        FockOperator A = parse_operator_spec(spec, 10);
        FockOperator B = parse_operator(write_operator(A));
        EXPECT_TRUE((B.matrix().array() == A.matrix().array()).all()) << spec;
    }
}

TEST(OperatorFormat, SpecialValuesSurvive) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = cplx(std::numeric_limits<double>::denorm_min(), -0.0);
    m(0, 1) = cplx(1.0 / 3.0, 1e300);
    m(1, 0) = cplx(-2.5e-310, 0.1);
    FockOperator A(m);
    FockOperator B = parse_operator(write_operator(A));
    EXPECT_TRUE((B.matrix().array() == A.matrix().array()).all());
    EXPECT_TRUE(std::signbit(B(0, 0).imag()));
}

TEST(OperatorFormat, ErrorsCarryLineAndColumn) {
    try {
        parse_operator("dim 2\nentries\n1 0 0 0\n0 0 x 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 4);
        EXPECT_EQ(e.column, 5);
        EXPECT_EQ(exit_code(e), 2);
    }
    try {
        parse_operator("# c\ndim 2\n  colour red\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3);
        EXPECT_EQ(e.column, 3);
    }
    EXPECT_THROW(parse_operator("dim 2\nentries\n1 0 0 0\n"), ParseError);
    EXPECT_THROW(parse_operator("dim 0\nentries\n"), ParseError);
    // flagged hermitian but not: a refusal, not a parse error
    EXPECT_THROW(parse_operator("dim 2\nhermitian true\nentries\n0 0 1 0\n0 0 0 0\n"), ValidationError);
}

TEST(OperatorSpec, Builtins) {
    EXPECT_EQ(parse_operator_spec("identity", 4).matrix(), Mat::Identity(4, 4));
    EXPECT_EQ(parse_operator_spec("ladder", 4).matrix(), build_ladder(4).first.matrix());
    EXPECT_EQ(parse_operator_spec("random-hermitian(3)", 6).matrix(), random_hermitian(6, 3).matrix());
    FockOperator p = parse_operator_spec("polynomial(1:1:1)", 5);
    EXPECT_LE((p.matrix() - build_number(5).matrix()).cwiseAbs().maxCoeff(), 1e-15);
    FockOperator m = parse_operator_spec("matrix(1 0 0 1 0 -1 2 0)", 0);
    EXPECT_EQ(m(0, 1), cplx(0, 1));
    EXPECT_EQ(m(1, 0), cplx(0, -1));
}

TEST(OperatorSpec, Errors) {
    try {
        parse_operator_spec("random-hermitian(x1)", 4);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.column, 18);
    }
    EXPECT_THROW(parse_operator_spec("wobble", 4), ParseError);
    EXPECT_THROW(parse_operator_spec("polynomial(1:2)", 4), ParseError);
    EXPECT_THROW(parse_operator_spec("number(", 4), ParseError);
    EXPECT_THROW(parse_state_spec("thermal(1.5)", 4), ParseError);
    EXPECT_THROW(parse_state_spec("fock(9)", 4), IndexError);
}

TEST(StateSpec, Builtins) {
    FockOperator v = parse_state_spec("vacuum", 6);
    EXPECT_EQ(v(0, 0), cplx(1.0));
    FockOperator c = parse_state_spec("coherent(1.5,-0.5)", 24);
    EXPECT_NEAR(std::abs(c.matrix().trace() - 1.0), 0.0, 1e-12);
    FockOperator t = parse_state_spec("thermal(0.5)", 32);
    EXPECT_NEAR(t(1, 1).real() / t(0, 0).real(), 0.5, 1e-15);
}

TEST(GridSpecText, ParseAndFormat) {
    GridSpec g = parse_grid_spec("-4:4:64");
    EXPECT_EQ(g, GridSpec::square(4, 64));
    GridSpec h = parse_grid_spec("-1:3:10,-2:2:20");
    EXPECT_EQ(parse_grid_spec(format_grid_spec(h)), h);
    EXPECT_THROW(parse_grid_spec("1:0:4"), ValidationError);
    EXPECT_THROW(parse_grid_spec("-1:1"), ParseError);
}

TEST(GridCsv, BitExactRoundTrip) {
    GridSpec s{-3.0, 2.5, 17, -1.0 / 3.0, 4.0, 9};
    PhaseGrid g = husimi_symbol_grid(random_operator(6, 8, false), s);
    g.values(3, 4) = cplx(-0.0, std::numeric_limits<double>::denorm_min());
    std::string text = write_grid_csv(g);
    PhaseGrid r = read_grid_csv(text);
    EXPECT_EQ(r.spec, g.spec);
    EXPECT_TRUE((r.values.array() == g.values.array()).all());
    EXPECT_EQ(write_grid_csv(r), text);
    EXPECT_TRUE(text.rfind("x_min,x_max,nx,p_min,p_max,np\n", 0) == 0);
}

TEST(GridCsv, RowMajorLayout) {
    GridSpec s = GridSpec::square(1, 2);
    PhaseGrid g(s);
    g.values(0, 1) = 7.0;
    g.values(1, 0) = 9.0;
    std::string text = write_grid_csv(g);
    EXPECT_NE(text.find("0,0\n7,0\n9,0\n0,0\n"), std::string::npos);
}

TEST(GridCsv, Malformed) {
    EXPECT_THROW(read_grid_csv("nope\n"), ParseError);
    EXPECT_THROW(read_grid_csv("x_min,x_max,nx,p_min,p_max,np\n0,1,1,0,1,2\n1,0\n"), ParseError);
    try {
        read_grid_csv("x_min,x_max,nx,p_min,p_max,np\n0,1,1,0,1,2\n1,0\n1,q\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 4);
        EXPECT_EQ(e.column, 3);
    }
}

TEST(Points, Parse) {
    auto pts = parse_points("# pts\n0,0\n 1.5, -2\n\n3,4 # tail\n");
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[1].x, 1.5);
    EXPECT_EQ(pts[1].p, -2);
    EXPECT_THROW(parse_points("1 2\n"), ParseError);
}

TEST(Manifest, HashesAndLayout) {
    RunManifest m;
    m.command = "symbol";
    m.config["dim"] = 8;
    m.hash_input("operator", "number");
    m.outputs = {"a.csv"};
    auto j = m.to_json();
    EXPECT_EQ(j["input_hashes"]["operator"], hex64(fnv1a("number")));
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Snapshots, NumberedFiles) {
    auto dir = std::filesystem::temp_directory_path() / "husimi_io_snap";
    std::filesystem::remove_all(dir);
    std::vector<PhaseGrid> snaps(3, PhaseGrid(GridSpec::square(1, 4)));
    snaps[2].values(1, 1) = 0.25;
    auto names = write_snapshot_series(dir.string(), snaps);
    ASSERT_EQ(names.size(), 3u);
    EXPECT_EQ(names[0], "snapshot_0000.csv");
    PhaseGrid back = read_grid_csv(read_file((dir / names[2]).string()));
    EXPECT_EQ(back.values(1, 1), cplx(0.25));
    std::filesystem::remove_all(dir);
}

TEST(ReportFormat, TextAndCsvTwin) {
    Report r;
    r.title = "values";
    auto& s = r.section("methods", {"method", "value"});
    s.rows.push_back({"trace", "1"});
    s.rows.push_back({"series, husimi", "0.99"});
    std::string t = r.text();
    EXPECT_NE(t.find("[methods]"), std::string::npos);
    EXPECT_NE(t.find("trace           1"), std::string::npos);
    EXPECT_EQ(r.csv(), "section,method,value\nmethods,trace,1\nmethods,\"series, husimi\",0.99\n");
}
