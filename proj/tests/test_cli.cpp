#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddop/cli.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
  json j;
};

CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = ddop::cli::run(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  if (!r.out.empty() && (r.out[0] == '{' || r.out[0] == '['))
    r.j = json::parse(r.out);
  return r;
}

}  // namespace

TEST_CASE("reduce emits one-based links") {
  CliResult r = run_cli({"reduce", "--types", "n, n^r s n^l, n", "--target", "s"});
  REQUIRE(r.code == 0);
  REQUIRE(r.j["result"] == "s");
  REQUIRE(r.j["links"] == json::parse("[[1,2],[4,5]]"));
  REQUIRE(r.j["diagnostics"]["survivors"] == json::parse("[3]"));
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("2 links"));
}

TEST_CASE("reduce failures are domain errors with JSON output") {
  CliResult r = run_cli({"reduce", "--types", "n, n", "--target", "s", "--json"});
  REQUIRE(r.code == 1);
  REQUIRE(r.j["error"]["type"] == "NotReducible");
  REQUIRE(r.out.find('\n') == r.out.size() - 1);  // compact: single line
  REQUIRE_THAT(r.err, !Catch::Matchers::ContainsSubstring("  at "));
}

TEST_CASE("bad type syntax is a domain error") {
  CliResult r = run_cli({"reduce", "--types", "n^", "--target", "s"});
  REQUIRE(r.code == 1);
  REQUIRE(r.j["error"]["type"] == "SyntaxError");
}

TEST_CASE("usage errors exit 2") {
  SECTION("unknown flag") {
    CliResult r = run_cli({"reduce", "--types", "n", "--target", "n", "--bogus"});
    REQUIRE(r.code == 2);
  }
  SECTION("missing required lexicon") {
    CliResult r = run_cli({"compose", "--phrase", "Beirut", "--target", "n"});
    REQUIRE(r.code == 2);
    REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("--lexicon"));
  }
  SECTION("no subcommand") {
    REQUIRE(run_cli({}).code == 2);
  }
  SECTION("unknown demo name") {
    REQUIRE(run_cli({"demo", "nowhere"}).code == 2);
  }
  SECTION("help exits 0") {
    CliResult r = run_cli({"--help"});
    REQUIRE(r.code == 0);
    REQUIRE_THAT(r.out, Catch::Matchers::ContainsSubstring("compose"));
  }
}

TEST_CASE("entail on the bundled lexicon") {
  CliResult r = run_cli({"entail", "--lexicon", "beirut", "--word-a", "Beirut-band-Z",
                         "--word-b", "Beirut-band"});
  REQUIRE(r.code == 0);
  REQUIRE(r.j["k"].get<double>() == Catch::Approx(0.5).margin(1e-6));
  REQUIRE(r.j["result"].get<double>() == Catch::Approx(0.5).margin(1e-6));

  CliResult unknown = run_cli({"entail", "--lexicon", "beirut", "--word-a", "nope",
                               "--word-b", "Beirut"});
  REQUIRE(unknown.code == 1);
  REQUIRE(unknown.j["error"]["type"] == "ValidationError");
}

TEST_CASE("entropy reports both views") {
  CliResult r = run_cli({"entropy", "--lexicon", "beirut", "--word", "Beirut"});
  REQUIRE(r.code == 0);
  REQUIRE(r.j["entropies"].size() == 2);
  REQUIRE(r.j["entropies"][0].get<double>() == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(r.j["entropies"][1].get<double>() == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(r.j["entropies"][1].get<double>() > 0.0);

  CliResult nat = run_cli({"entropy", "--lexicon", "beirut", "--word", "Beirut",
                           "--base", "e"});
  REQUIRE(nat.code == 0);
  REQUIRE(nat.j["entropies"][0].get<double>() ==
          Catch::Approx(std::log(2.0)).margin(1e-9));

  REQUIRE(run_cli({"entropy", "--lexicon", "beirut", "--word", "Beirut",
                   "--base", "10"})
              .code == 2);
}

TEST_CASE("compose picks the pronoun reading by word order") {
  CliResult subj = run_cli({"compose", "--lexicon", "beirut", "--phrase",
                            "Beirut that play-at Beirut", "--target", "n"});
  REQUIRE(subj.code == 0);
  REQUIRE(subj.j["links"].size() == 4);
  REQUIRE(subj.j["diagnostics"]["chosen_types"][1] == "n^r n s^l n");
  REQUIRE(subj.j["diagnostics"]["entropy1"].get<double>() ==
          Catch::Approx(0.0).margin(1e-9));
  REQUIRE(subj.j["diagnostics"]["entropy2"].get<double>() ==
          Catch::Approx(2.0).margin(1e-9));
  REQUIRE(subj.j["result"]["layout"] == "N N* N N*");
  REQUIRE(subj.j["result"]["data"].size() == 256);

  CliResult obj = run_cli({"compose", "--lexicon", "beirut", "--phrase",
                           "Beirut that Beirut play-at", "--target", "n"});
  REQUIRE(obj.code == 0);
  REQUIRE(obj.j["diagnostics"]["chosen_types"][1] == "n^r n n^ll s^l");
  REQUIRE(obj.j["diagnostics"]["entropy2"].get<double>() ==
          Catch::Approx(0.0).margin(1e-9));

  CliResult bad = run_cli({"compose", "--lexicon", "beirut", "--phrase",
                           "Beirut quux", "--target", "n", "--json"});
  REQUIRE(bad.code == 1);
  REQUIRE(bad.j["error"]["type"] == "ValidationError");

  CliResult stuck = run_cli({"compose", "--lexicon", "beirut", "--phrase",
                             "Beirut Beirut", "--target", "s"});
  REQUIRE(stuck.code == 1);
  REQUIRE(stuck.j["error"]["type"] == "NotReducible");
}

TEST_CASE("validate accepts the bundled lexicon and rejects bad files") {
  CliResult ok = run_cli({"validate", "--lexicon", "beirut"});
  REQUIRE(ok.code == 0);
  REQUIRE(ok.j["result"] == "ok");
  REQUIRE(ok.j["findings"].empty());

  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "ddop_bad.ddlex.json";
  {
    std::ofstream f(path);
    f << R"({"spaces": [{"name": "N", "type": "n", "basis": ["A"]}],
             "words": [{"name": "w", "type": "n", "kind": "mixture",
                        "groups": [{"weight": -1,
                                    "senses": [{"vector": [["A", 1.0]]}]}]}]})";
  }
  CliResult bad = run_cli({"validate", "--lexicon", path.string()});
  REQUIRE(bad.code == 1);
  REQUIRE(bad.j["error"]["type"] == "ValidationError");
  REQUIRE_THAT(bad.j["error"]["message"].get<std::string>(),
               Catch::Matchers::ContainsSubstring("'w'"));
  fs::remove(path);

  CliResult missing = run_cli({"validate", "--lexicon", "/no/such/file.ddlex.json"});
  REQUIRE(missing.code == 1);
  REQUIRE(missing.j["error"]["type"] == "IoError");
}

TEST_CASE("demo beirut tells the two phrases apart") {
  CliResult r = run_cli({"demo", "beirut"});
  REQUIRE(r.code == 0);
  const json& res = r.j["result"];
  REQUIRE(res["ambiguous_word"]["entropy2"].get<double>() > 0.9);
  REQUIRE(res["subject_phrase"]["verdict"] == "Beirut-band");
  REQUIRE(res["object_phrase"]["verdict"] == "Beirut-city");
  REQUIRE(res["subject_phrase"]["proportional_to"]["Beirut-band"].get<double>() ==
          Catch::Approx(1.0).margin(1e-9));
  REQUIRE(res["subject_phrase"]["proportional_to"]["Beirut-city"].is_null());
  REQUIRE(res["subject_phrase"]["entropy1"].get<double>() ==
          Catch::Approx(0.0).margin(1e-9));
  REQUIRE(res["object_phrase"]["entropy1"].get<double>() ==
          Catch::Approx(0.0).margin(1e-9));
  REQUIRE(res["object_phrase"]["entails"]["Beirut-city"].get<double>() ==
          Catch::Approx(0.5).margin(1e-6));
  REQUIRE(res["object_phrase"]["entails"]["Beirut-band"].get<double>() ==
          Catch::Approx(0.0).margin(1e-6));
  REQUIRE(res["subject_phrase"]["links"].size() == 4);
}

TEST_CASE("demo beirut is byte-deterministic under --json") {
  CliResult a = run_cli({"demo", "beirut", "--json"});
  CliResult b = run_cli({"demo", "beirut", "--json"});
  REQUIRE(a.code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(a.out.find('\n') == a.out.size() - 1);
  REQUIRE(json::parse(a.out).contains("result"));
}
