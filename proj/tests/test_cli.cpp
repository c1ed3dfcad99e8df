#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cotforge/cli.hpp"
#include "cotforge/sha256.hpp"
#include "helpers.hpp"

using namespace cotforge;
using testutil::TempDir;

namespace {

struct CaptureStreams {
    std::ostringstream out, err;
    std::streambuf* old_out;
    std::streambuf* old_err;
    CaptureStreams() : old_out(std::cout.rdbuf(out.rdbuf())), old_err(std::cerr.rdbuf(err.rdbuf())) {}
    ~CaptureStreams() {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    CaptureStreams capture;
    int code = dispatch(std::move(args));
    if (out) *out = capture.out.str();
    if (err) *err = capture.err.str();
    return code;
}

void write_mock_generator(const std::string& path,
                          const std::vector<ClinicalRecord>& records) {
    ordered_json script = ordered_json::array();
    for (const auto& r : records) {
        for (const auto& entry : testutil::success_script(r)) {
            script.push_back(ordered_json{{"text", entry.text}});
        }
    }
    testutil::write_file(path, ordered_json{{"type", "mock"}, {"script", script}}.dump());
}

}  // namespace

TEST_CASE("sha256 matches the reference vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
    std::string long_input(1000, 'a');
    CHECK(sha256_hex(long_input) == sha256_hex(long_input));

    TempDir tmp("sha");
    testutil::write_file(tmp.file("f.bin"), "abc");
    CHECK(sha256_file(tmp.file("f.bin")) == sha256_hex("abc"));
}

TEST_CASE("--help lists all eight subcommands and exits 0") {
    std::string out;
    CHECK(run({"--help"}, &out) == 0);
    for (const char* sub : {"synthesize", "build-bench", "pack", "reward", "rl-toy",
                            "evaluate", "emit-config", "report"}) {
        INFO(sub);
        CHECK(out.find(sub) != std::string::npos);
    }
}

TEST_CASE("unknown flags exit 1 with usage on stderr") {
    std::string err;
    CHECK(run({"pack", "--bogus-flag"}, nullptr, &err) == 1);
    CHECK(err.find("Usage") != std::string::npos);
}

TEST_CASE("no subcommand prints usage and exits 1") {
    std::string err;
    CHECK(run({}, nullptr, &err) == 1);
}

TEST_CASE("invalid records fail with a line-numbered message and exit 1") {
    TempDir tmp("cli");
    testutil::write_file(tmp.file("records.jsonl"),
                         to_json(testutil::sample_record("r1")).dump() + "\n{broken\n");
    testutil::write_file(tmp.file("gen.json"),
                         R"({"type":"mock","script":["x"]})");
    std::string err;
    int code = run({"synthesize", "--records", tmp.file("records.jsonl"), "--out",
                    tmp.file("out.jsonl"), "--generator", tmp.file("gen.json")},
                   nullptr, &err);
    CHECK(code == 1);
    CHECK(err.find("line 2") != std::string::npos);
}

TEST_CASE("missing required options exit 1") {
    std::string err;
    CHECK(run({"synthesize"}, nullptr, &err) == 1);
    CHECK(err.find("--records") != std::string::npos);
}

TEST_CASE("transport failures exit 2") {
    TempDir tmp("cli");
    write_records({testutil::sample_record("r1")}, tmp.file("records.jsonl"));
    testutil::write_file(
        tmp.file("gen.json"),
        R"({"type":"mock","max_retries":0,"script":[{"fail":"network"}]})");
    int code = run({"synthesize", "--records", tmp.file("records.jsonl"), "--out",
                    tmp.file("out.jsonl"), "--generator", tmp.file("gen.json")});
    CHECK(code == 2);
}

TEST_CASE("config precedence: CLI flag > config file > default") {
    TempDir tmp("cli");
    CoTSample s;
    s.question = "q1 q2";
    s.thinking = "t1 t2";
    s.response = "r1";
    s.provenance.record_id = "ra";
    write_samples({s}, tmp.file("samples.jsonl"));

    auto manifest_max_len = [&](const std::string& tag) {
        auto m = load_json_file(tmp.file(tag + ".jsonl.manifest.json"));
        return m.at("config").at("max-len").get<std::size_t>();
    };

    // default
    REQUIRE(run({"pack", "--samples", tmp.file("samples.jsonl"), "--out",
                 tmp.file("d.jsonl")}) == 0);
    CHECK(manifest_max_len("d") == 4096);

    // config file value
    testutil::write_file(tmp.file("cfg.json"), R"({"max-len": 32})");
    REQUIRE(run({"--config", tmp.file("cfg.json"), "pack", "--samples",
                 tmp.file("samples.jsonl"), "--out", tmp.file("c.jsonl")}) == 0);
    CHECK(manifest_max_len("c") == 32);

    // explicit flag beats the config file
    REQUIRE(run({"--config", tmp.file("cfg.json"), "pack", "--samples",
                 tmp.file("samples.jsonl"), "--out", tmp.file("f.jsonl"), "--max-len",
                 "16"}) == 0);
    CHECK(manifest_max_len("f") == 16);
}

TEST_CASE("manifests digest the files they sit beside") {
    TempDir tmp("cli");
    auto pool = testutil::synthetic_pool(8, 6);
    write_records(pool, tmp.file("pool.jsonl"));
    REQUIRE(run({"build-bench", "--pool", tmp.file("pool.jsonl"), "--quota", "4", "--cap",
                 "2", "--out", tmp.file("bench.jsonl"), "--seed", "3"}) == 0);

    auto manifest = load_json_file(tmp.file("bench.jsonl.manifest.json"));
    CHECK(manifest.at("subcommand") == "build-bench");
    CHECK(manifest.at("digest_algorithm") == "sha256");
    CHECK(manifest.at("seed") == 3);
    for (const auto& input : manifest.at("inputs")) {
        CHECK(input.at("digest").get<std::string>() ==
              sha256_file(input.at("path").get<std::string>()));
    }
    for (const auto& output : manifest.at("outputs")) {
        CHECK(output.at("digest").get<std::string>() ==
              sha256_file(output.at("path").get<std::string>()));
    }
    auto cases = load_benchmark(tmp.file("bench.jsonl"));
    CHECK(cases.size() == 4 * 7);
}

TEST_CASE("exclude list removes pool records before building") {
    TempDir tmp("cli");
    auto pool = testutil::synthetic_pool(6, 6);
    write_records(pool, tmp.file("pool.jsonl"));
    testutil::write_file(tmp.file("exclude.txt"), "J-0000\nJ-0001\n");
    int code = run({"build-bench", "--pool", tmp.file("pool.jsonl"), "--quota", "6", "--cap",
                    "6", "--exclude", tmp.file("exclude.txt"), "--out",
                    tmp.file("bench.jsonl")});
    CHECK(code == 1);  // Respiratory now has 4 < quota 6

    testutil::write_file(tmp.file("exclude2.txt"), "\n");
    CHECK(run({"build-bench", "--pool", tmp.file("pool.jsonl"), "--quota", "6", "--cap", "6",
               "--exclude", tmp.file("exclude2.txt"), "--out", tmp.file("bench.jsonl")}) == 0);
}

TEST_CASE("emit-config writes the requested stage document") {
    TempDir tmp("cli");
    REQUIRE(run({"emit-config", "--stage", "rl", "--out", tmp.file("rl.json")}) == 0);
    auto doc = load_json_file(tmp.file("rl.json"));
    CHECK(doc == emit_training_config(TrainingStage::rl));
    REQUIRE(run({"emit-config", "--stage", "sft", "--out", tmp.file("sft.json")}) == 0);
    CHECK(load_json_file(tmp.file("sft.json")) == emit_training_config(TrainingStage::sft));
}

TEST_CASE("rl-toy writes a curve with the documented header") {
    TempDir tmp("cli");
    REQUIRE(run({"rl-toy", "--seed", "0", "--steps", "30", "--k", "3", "--out",
                 tmp.file("curve.csv")}) == 0);
    auto csv = testutil::read_file(tmp.file("curve.csv"));
    CHECK(csv.rfind("step,mean_reward,p_think_correct\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 30 + 1);
}

TEST_CASE("reward subcommand scores prediction files") {
    TempDir tmp("cli");
    auto r1 = testutil::sample_record("r1");
    auto r2 = testutil::make_record("r2", Department::Respiratory, "J45.9",
                                    "Asthma, unspecified");
    write_records({r1, r2}, tmp.file("refs.jsonl"));
    testutil::write_file(
        tmp.file("pred.jsonl"),
        ordered_json{{"id", "r1"},
                     {"answer", "type 2 diabetes mellitus"},
                     {"thinking", "reasoned"}}.dump() +
            "\n" +
            ordered_json{{"id", "r2"}, {"answer", nullptr}, {"thinking", "reasoned"}}.dump() +
            "\n");

    std::string out;
    REQUIRE(run({"reward", "--pred", tmp.file("pred.jsonl"), "--ref", tmp.file("refs.jsonl")},
                &out) == 0);
    auto lines = split_lines(out);
    REQUIRE(lines.size() == 2);
    auto first = ordered_json::parse(lines[0]);
    CHECK(first.at("value") == 1.0);
    CHECK(first.at("verdict").at("method") == "exact_normalized");
    auto second = ordered_json::parse(lines[1]);
    CHECK(second.at("value") == 0.0);
    CHECK(second.at("answered") == false);

    // with --out, a manifest appears beside the file
    REQUIRE(run({"reward", "--pred", tmp.file("pred.jsonl"), "--ref", tmp.file("refs.jsonl"),
                 "--out", tmp.file("rewards.jsonl")}) == 0);
    CHECK(std::filesystem::exists(tmp.file("rewards.jsonl.manifest.json")));

    // unknown prediction id fails
    testutil::write_file(tmp.file("bad.jsonl"),
                         ordered_json{{"id", "zz"}, {"answer", "x"}, {"thinking", "t"}}.dump() +
                             "\n");
    CHECK(run({"reward", "--pred", tmp.file("bad.jsonl"), "--ref", tmp.file("refs.jsonl")}) ==
          1);
}

TEST_CASE("report renders coverage for a benchmark file") {
    TempDir tmp("cli");
    auto pool = testutil::synthetic_pool(8, 6);
    write_records(pool, tmp.file("pool.jsonl"));
    REQUIRE(run({"build-bench", "--pool", tmp.file("pool.jsonl"), "--quota", "4", "--cap",
                 "2", "--out", tmp.file("bench.jsonl")}) == 0);
    REQUIRE(run({"report", "--bench", tmp.file("bench.jsonl"), "--out", tmp.dir() + "/cov"}) ==
            0);
    auto coverage = load_json_file(tmp.dir() + "/cov/coverage.json");
    CHECK(coverage.at("total_cases") == 28);
    CHECK(std::filesystem::exists(tmp.dir() + "/cov/coverage.csv"));
    CHECK(std::filesystem::exists(tmp.dir() + "/cov/manifest.json"));

    std::string err;
    CHECK(run({"report", "--out", tmp.dir() + "/cov"}, nullptr, &err) == 1);
}

TEST_CASE("scripted end-to-end pipeline is byte-identical across runs") {
    TempDir tmp("cli");
    std::vector<ClinicalRecord> records = {
        testutil::make_record("e1", Department::Cardiology, "I10", "Essential hypertension"),
        testutil::make_record("e2", Department::Respiratory, "J45.9", "Asthma, unspecified"),
    };
    write_records(records, tmp.file("records.jsonl"));
    write_mock_generator(tmp.file("gen.json"), records);
    testutil::write_file(
        tmp.file("judge.json"),
        R"({"type":"mock","script":[{"text":"Same condition.\nVERDICT: CORRECT"},{"text":"Same condition.\nVERDICT: CORRECT"}]})");

    // an evaluation model that answers each case correctly, routed by content
    ordered_json keyed = ordered_json::object();
    for (const auto& r : records) {
        keyed[r.reference_diagnosis.name] = ordered_json::array(
            {ordered_json{{"text", "FINAL DIAGNOSIS: " + r.reference_diagnosis.name}}});
    }
    testutil::write_file(tmp.file("model.json"),
                         ordered_json{{"type", "mock"}, {"keyed", keyed}}.dump());

    // a two-case benchmark over the same records
    std::vector<BenchmarkCase> bench;
    for (const auto& r : records) {
        bench.push_back(BenchmarkCase{r, icd10_category(r.reference_diagnosis.icd10)});
    }
    write_benchmark(bench, tmp.file("bench.jsonl"));

    auto run_pipeline = [&](const std::string& dir) {
        std::filesystem::create_directories(tmp.dir() + "/" + dir);
        auto at = [&](const std::string& f) { return tmp.dir() + "/" + dir + "/" + f; };
        write_mock_generator(tmp.file("gen.json"), records);  // fresh scripts per run
        REQUIRE(run({"synthesize", "--records", tmp.file("records.jsonl"), "--out",
                     at("samples.jsonl"), "--generator", tmp.file("gen.json"), "--seed",
                     "1"}) == 0);
        REQUIRE(run({"reward", "--pred", at("samples.jsonl"), "--ref",
                     tmp.file("records.jsonl"), "--judge", tmp.file("judge.json"), "--out",
                     at("rewards.jsonl")}) == 0);
        REQUIRE(run({"pack", "--samples", at("samples.jsonl"), "--max-len", "256", "--out",
                     at("packed.jsonl")}) == 0);
        REQUIRE(run({"evaluate", "--bench", tmp.file("bench.jsonl"), "--model",
                     tmp.file("model.json"), "--style", "cot", "--out", at("report")}) == 0);
    };

    run_pipeline("one");
    run_pipeline("two");

    for (const char* f : {"samples.jsonl", "samples.jsonl.failures.jsonl", "rewards.jsonl",
                          "packed.jsonl", "report/report.csv", "report/report.json"}) {
        INFO(f);
        CHECK(testutil::read_file(tmp.dir() + "/one/" + f) ==
              testutil::read_file(tmp.dir() + "/two/" + f));
    }

    // spot-check content: judge-accepted rewards and a perfect report
    auto rewards = testutil::read_file(tmp.dir() + "/one/rewards.jsonl");
    CHECK(rewards.find("\"value\":1.0") != std::string::npos);
    auto report = load_json_file(tmp.dir() + "/one/report/report.json");
    CHECK(report.at("overall").at("accuracy") == 1.0);
}
