#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cotforge/pack.hpp"
#include "helpers.hpp"

using namespace cotforge;

namespace {

SampleLengths lengths(const std::string& id, std::size_t q, std::size_t t, std::size_t r) {
    SampleLengths s;
    s.id = id;
    s.question = q;
    s.thinking = t;
    s.response = r;
    return s;
}

/// O(n^2) oracle: token pair (i, j) is visible iff some segment contains both
/// and j <= i. Checked against the implementation and the metadata encoding.
void check_visibility_oracle(const PackedSequence& seq) {
    auto meta = emit_attention_metadata(seq);
    REQUIRE(meta.size() == seq.length());
    for (std::size_t i = 0; i < seq.length(); ++i) {
        for (std::size_t j = 0; j < seq.length(); ++j) {
            bool oracle = false;
            for (const auto& seg : seq.segments) {
                if (i >= seg.begin && i < seg.end && j >= seg.begin && j < seg.end && j <= i) {
                    oracle = true;
                    break;
                }
            }
            bool via_meta = meta[i] == meta[j] && meta[i] >= 0 && j <= i;
            INFO("i=" << i << " j=" << j);
            REQUIRE(visible(seq, i, j) == oracle);
            REQUIRE(via_meta == oracle);
        }
    }
}

}  // namespace

TEST_CASE("FFD arithmetic on the three-sample example") {
    // lengths [10, 20, 30], max 64: FFD order [30, 20, 10], one sequence
    auto seqs = pack({lengths("s10", 2, 4, 4), lengths("s20", 5, 10, 5),
                      lengths("s30", 10, 10, 10)},
                     64);
    REQUIRE(seqs.size() == 1);
    const auto& segs = seqs[0].segments;
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].sample_id == "s30");
    CHECK(segs[0].begin == 0);
    CHECK(segs[0].end == 30);
    CHECK(segs[1].sample_id == "s20");
    CHECK(segs[1].begin == 30);
    CHECK(segs[1].end == 50);
    CHECK(segs[2].sample_id == "s10");
    CHECK(segs[2].begin == 50);
    CHECK(segs[2].end == 60);
}

TEST_CASE("oversized sample is rejected, naming the id and its length") {
    CHECK_THROWS_WITH(pack({lengths("big", 30, 30, 5)}, 64),
                      Catch::Matchers::ContainsSubstring("\"big\"") &&
                          Catch::Matchers::ContainsSubstring("65"));
    CHECK_NOTHROW(pack({lengths("fits", 30, 30, 4)}, 64));
}

TEST_CASE("attention metadata examples") {
    PackedSequence one;
    one.segments = {Segment{"a", 0, 4, 1}};
    CHECK(emit_attention_metadata(one) == std::vector<int>{0, 0, 0, 0});

    PackedSequence two;
    two.segments = {Segment{"a", 0, 2, 1}, Segment{"b", 2, 5, 1}};
    CHECK(emit_attention_metadata(two) == std::vector<int>{0, 0, 1, 1, 1});
}

TEST_CASE("segments reconstructed from metadata equal the originals") {
    auto seqs = pack({lengths("a", 1, 2, 2), lengths("b", 2, 2, 2), lengths("c", 1, 1, 1)}, 16);
    for (const auto& seq : seqs) {
        auto meta = emit_attention_metadata(seq);
        std::vector<std::pair<std::size_t, std::size_t>> rebuilt;
        for (std::size_t i = 0; i < meta.size();) {
            std::size_t j = i;
            while (j < meta.size() && meta[j] == meta[i]) ++j;
            rebuilt.emplace_back(i, j);
            i = j;
        }
        REQUIRE(rebuilt.size() == seq.segments.size());
        for (std::size_t s = 0; s < rebuilt.size(); ++s) {
            CHECK(rebuilt[s].first == seq.segments[s].begin);
            CHECK(rebuilt[s].second == seq.segments[s].end);
        }
    }
}

TEST_CASE("random instances: isolation, conservation and capacity") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t max_len = 32 + rng() % 96;
        std::size_t n = 2 + rng() % 12;
        std::vector<SampleLengths> samples;
        std::size_t total_in = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t q = 1 + rng() % 8, t = 1 + rng() % 10, r = 1 + rng() % 6;
            if (q + t + r > max_len) {
                q = 1;
                t = 1;
                r = 1;
            }
            samples.push_back(lengths("s" + std::to_string(i), q, t, r));
            total_in += q + t + r;
        }

        auto seqs = pack(samples, max_len);
        std::size_t total_out = 0;
        std::set<std::string> placed;
        for (const auto& seq : seqs) {
            validate_packed(seq, max_len);
            CHECK(seq.length() <= max_len);
            for (const auto& seg : seq.segments) {
                total_out += seg.length();
                CHECK(placed.insert(seg.sample_id).second);  // exactly once
            }
            check_visibility_oracle(seq);
        }
        CHECK(total_out == total_in);
        CHECK(placed.size() == n);
    }
}

TEST_CASE("loss mask is false on question tokens, true on thinking and response") {
    auto seqs = pack({lengths("a", 3, 4, 2), lengths("b", 1, 1, 1)}, 16);
    for (const auto& seq : seqs) {
        for (const auto& seg : seq.segments) {
            for (std::size_t t = seg.begin; t < seg.end; ++t) {
                bool is_question = t < seg.begin + seg.question_len;
                CHECK(seq.loss_mask[t] == !is_question);
            }
        }
    }
}

TEST_CASE("whitespace tokenizer round-trips the test lexicon") {
    WhitespaceTokenizer tok;
    std::vector<std::string> lexicon = {
        "patient presents with cough and fever",
        "hmm the presentation points toward asthma",
        "type 2 diabetes mellitus confirmed",
    };
    for (const auto& text : lexicon) {
        CHECK(tok.decode(tok.encode(text)) == text);
    }
    CHECK(tok.vocab_size() > 1);
    CHECK(tok.encode("") == std::vector<int>{});
    // pad id never collides with real tokens
    auto ids = tok.encode("cough fever cough");
    for (int id : ids) CHECK(id != WhitespaceTokenizer::kPadId);
    CHECK(ids[0] == ids[2]);
}

TEST_CASE("pack_samples materializes token ids aligned with segments") {
    CoTSample a;
    a.question = "q1 q2 q3";
    a.thinking = "t1 t2";
    a.response = "r1";
    a.provenance.record_id = "ra";
    CoTSample b = a;
    b.question = "q1";
    b.thinking = "t9 t8 t7 t6";
    b.response = "r1 r2";
    b.provenance.record_id = "rb";

    WhitespaceTokenizer tok;
    auto seqs = pack_samples({a, b}, 32, tok);
    std::size_t total = 0;
    for (const auto& seq : seqs) {
        REQUIRE(seq.token_ids.size() == seq.length());
        REQUIRE(seq.loss_mask.size() == seq.length());
        total += seq.token_ids.size();
        for (const auto& seg : seq.segments) {
            const CoTSample& src = seg.sample_id == "ra" ? a : b;
            std::vector<int> expected = tok.encode(src.question);
            auto t = tok.encode(src.thinking);
            auto r = tok.encode(src.response);
            expected.insert(expected.end(), t.begin(), t.end());
            expected.insert(expected.end(), r.begin(), r.end());
            std::vector<int> actual(seq.token_ids.begin() + seg.begin,
                                    seq.token_ids.begin() + seg.end);
            CHECK(actual == expected);
        }
    }
    CHECK(total == 6 + 7);
}

TEST_CASE("pad_to_max right-pads with the reserved id and a false mask") {
    CoTSample a;
    a.question = "q";
    a.thinking = "t";
    a.response = "r";
    a.provenance.record_id = "ra";
    WhitespaceTokenizer tok;
    auto seqs = pack_samples({a}, 8, tok, /*pad_to_max=*/true);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].token_ids.size() == 8);
    CHECK(seqs[0].loss_mask.size() == 8);
    for (std::size_t i = 3; i < 8; ++i) {
        CHECK(seqs[0].token_ids[i] == WhitespaceTokenizer::kPadId);
        CHECK_FALSE(seqs[0].loss_mask[i]);
    }
    CHECK(seqs[0].segments.back().end == 3);  // segments cover content only
}

TEST_CASE("duplicate sample ids are rejected") {
    CoTSample a;
    a.question = "q";
    a.thinking = "t";
    a.response = "r";
    a.provenance.record_id = "same";
    WhitespaceTokenizer tok;
    CHECK_THROWS_AS(pack_samples({a, a}, 8, tok), ValidationError);
}

TEST_CASE("empty samples and zero max length are rejected") {
    CHECK_THROWS_AS(pack({lengths("e", 0, 0, 0)}, 8), ValidationError);
    CHECK_THROWS_AS(pack({lengths("x", 1, 1, 1)}, 0), ValidationError);
    CHECK(pack({}, 8).empty());
}
