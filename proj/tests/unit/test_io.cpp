#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "polytoep/json_io.hpp"
#include "polytoep/run_config.hpp"

using namespace polytoep;
using io::json;

TEST(Scalars, ExactAndFloatLiterals) {
  EXPECT_TRUE(is_exact(io::parse_scalar("3/4-1/2i")));
  EXPECT_TRUE(is_exact(io::parse_scalar(2)));
  EXPECT_FALSE(is_exact(io::parse_scalar(0.5)));
  EXPECT_EQ(to_complex(io::parse_scalar("0.25-0.5i")), std::complex<double>(0.25, -0.5));
  EXPECT_EQ(to_complex(io::parse_scalar("1e-1i")), std::complex<double>(0, 0.1));
  for (const char* bad : {"0.5+", "0.5+-1i", "x.5", "1.0j", "+0.5"}) EXPECT_THROW(io::parse_scalar(bad), invalid_input) << bad;
  EXPECT_THROW(io::parse_scalar(json::array()), invalid_input);
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_complex({0.5, -1}), "0.5-i");
}

TEST(Symbols, RoundTrip) {
  const json doc = json::parse(R"({"vars": 2, "expr": {"product": [
      {"conj": {"blaschke": {"var": 1, "zero": "1/2"}}},
      {"blaschke": {"var": 2, "zero": "0.25+0.125i"}},
      {"laurent": {"terms": [{"k": [0, 1], "c": "i"}, {"k": [-1, 0], "c": 2}]}},
      {"monomial": [1, 1]},
      {"sum": [{"const": "1"}, {"const": 0.5}]}]}})");
  const SymbolExpr s = io::parse_symbol(doc);
  EXPECT_EQ(s.vars(), 2u);
  EXPECT_EQ(io::symbol_json(io::parse_symbol(io::symbol_json(s))), io::symbol_json(s));
  const std::complex<double> w[] = {{0.6, 0.8}, {0, 1}};
  EXPECT_NEAR(std::abs(evaluate(s, w) - evaluate(io::parse_symbol(io::symbol_json(s)), w)), 0, 1e-15);
}

TEST(Symbols, InvalidDocuments) {
  for (const char* bad : {R"({"vars": 0, "expr": {"const": "1"}})", R"({"vars": 1})",
                          R"({"vars": 1, "expr": {"blaschke": {"var": 2, "zero": "0"}}})",
                          R"({"vars": 1, "expr": {"blaschke": {"var": 1, "zero": "1"}}})",
                          R"({"vars": 1, "expr": {"monomial": [1, 2]}})",
                          R"({"vars": 1, "expr": {"laurent": {"terms": [{"k": [1], "c": 0.5}]}}})",
                          R"({"vars": 1, "expr": {"bogus": 1}})", R"({"vars": 1, "expr": {"const": "3/0"}})",
                          R"({"vars": 1, "expr": {"product": []}})"})
    EXPECT_THROW(io::parse_symbol(json::parse(bad)), invalid_input) << bad;
}

TEST(Matrices, RoundTrip) {
  ComplexMatrix m(2, 3);
  m << 1, std::complex<double>(0, -2), 0.125, 0, 3, std::complex<double>(-1, 1);
  EXPECT_EQ(io::parse_matrix(io::matrix_json(m)), m);
  EXPECT_THROW(io::parse_matrix(json::parse(R"({"rows": 2, "cols": 2, "entries": [1, 2, 3]})")), invalid_input);
}

TEST(Reports, CarryVerdictAndWitness) {
  CheckReport r;
  r.check = "hyponormal";
  r.verdict = Verdict::FAIL;
  r.residual = 1;
  r.witness = Witness{Witness::Kind::eigenvector, {{1, 0}, {0, 0}}, {}};
  const json j = io::report_json(r, {{"input_sha256", "x"}});
  EXPECT_EQ(j["verdict"], "FAIL");
  EXPECT_EQ(j["witness"]["kind"], "eigenvector");
  EXPECT_EQ(j["witness"]["value"][0], json::array({1.0, 0.0}));
  EXPECT_EQ(j["inputs"]["input_sha256"], "x");
}

TEST(Variables, Tags) {
  const SymbolExpr s = io::parse_symbol(json::parse(R"({"vars": 3, "expr": {"laurent": {"terms": [
      {"k": [1, -1, 0], "c": 1}, {"k": [-2, -1, 0], "c": "i"}]}}})"));
  const VariableClassification vc = classify_variables(s, 1e-10);
  EXPECT_EQ(vc.tags, (std::vector<VarTag>{VarTag::MIXED, VarTag::COANALYTIC, VarTag::ABSENT}));
  EXPECT_EQ(*vc.negative_witness[0], (MultiIndex{-2, -1, 0}));
  const VariableClassification nb = classify_variables(sym::conj(sym::blaschke(2, 1, std::complex<double>(0.5, 0))), 1e-10);
  EXPECT_FALSE(nb.exact);
  EXPECT_EQ(nb.tags, (std::vector<VarTag>{VarTag::ABSENT, VarTag::COANALYTIC}));
}

TEST(Config, MergeAndResolve) {
  RunConfig c = merge_config({}, json::parse(R"({"inner_box": [2, 3], "outer_box": 16, "eps": 1e-12})"));
  EXPECT_EQ(c.inner(2).degrees(), (MultiIndex{2, 3}));
  EXPECT_EQ(c.outer(2).degrees(), (MultiIndex{16, 16}));
  EXPECT_THROW(c.inner(3), invalid_input);
  EXPECT_THROW(merge_config({}, json::parse(R"({"epsilon": 1})")), invalid_input);
  EXPECT_THROW(merge_config({}, json::parse(R"({"eps": "small"})")), invalid_input);
  RunConfig bad;
  bad.inner_box = {30};
  EXPECT_THROW(bad.validate(), invalid_input);
  bad = {};
  bad.tol_pass = 0;
  EXPECT_THROW(bad.validate(), invalid_input);
}

TEST(Config, EnvironmentThenExplicitFile) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto env_file = dir / "polytoep_env_cfg.json", cli_file = dir / "polytoep_cli_cfg.json";
  std::ofstream(env_file) << R"({"grid_m": 16, "max_m": 5})";
  std::ofstream(cli_file) << R"({"grid_m": 32})";
  ::setenv("POLYTOEP_CONFIG", env_file.c_str(), 1);
  const RunConfig c = load_config(cli_file.string());
  ::unsetenv("POLYTOEP_CONFIG");
  EXPECT_EQ(c.grid_m, 32);
  EXPECT_EQ(c.max_m, 5);
  EXPECT_EQ(load_config("").grid_m, 64);
  EXPECT_THROW(load_config((dir / "polytoep_missing.json").string()), invalid_input);
  std::filesystem::remove(env_file);
  std::filesystem::remove(cli_file);
}
