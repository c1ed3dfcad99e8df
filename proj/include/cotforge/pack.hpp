#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cotforge/errors.hpp"
#include "cotforge/record.hpp"
#include "cotforge/text.hpp"

namespace cotforge {

/// Reversible whitespace tokenizer used so packing is verifiable without any
/// model asset. Id 0 is the reserved pad token.
class WhitespaceTokenizer {
public:
    static constexpr int kPadId = 0;

    WhitespaceTokenizer() { id_to_token_.push_back("<pad>"); }

    std::vector<int> encode(const std::string& text) {
        std::vector<int> ids;
        for (const auto& tok : split_whitespace(text)) {
            auto [it, inserted] = token_to_id_.try_emplace(tok, id_to_token_.size());
            if (inserted) id_to_token_.push_back(tok);
            ids.push_back(static_cast<int>(it->second));
        }
        return ids;
    }

    std::string decode(const std::vector<int>& ids) const {
        std::string out;
        for (int id : ids) {
            if (id == kPadId) continue;
            if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
                throw ValidationError("token id " + std::to_string(id) + " out of vocabulary");
            }
            if (!out.empty()) out.push_back(' ');
            out += id_to_token_[id];
        }
        return out;
    }

    std::size_t vocab_size() const { return id_to_token_.size(); }

private:
    std::map<std::string, std::size_t> token_to_id_;
    std::vector<std::string> id_to_token_;
};

/// Per-section token counts for one sample.
struct SampleLengths {
    std::string id;
    std::size_t question = 0;
    std::size_t thinking = 0;
    std::size_t response = 0;

    std::size_t total() const { return question + thinking + response; }
};

/// One sample placed inside a packed sequence.
struct Segment {
    std::string sample_id;
    std::size_t begin = 0;  // inclusive token offset
    std::size_t end = 0;    // exclusive
    std::size_t question_len = 0;

    std::size_t length() const { return end - begin; }
};

struct PackedSequence {
    std::vector<int> token_ids;  // empty when packing lengths only
    std::vector<Segment> segments;
    std::vector<bool> loss_mask;  // false on question tokens, true on thinking/response

    std::size_t length() const {
        return segments.empty() ? 0 : segments.back().end;
    }
};

/// First-fit-decreasing packing of samples into sequences of at most
/// max_seq_len tokens. Every sample lands in exactly one segment; segment
/// offsets are contiguous within each sequence.
inline std::vector<PackedSequence> pack(const std::vector<SampleLengths>& samples,
                                        std::size_t max_seq_len) {
    if (max_seq_len < 1) throw ValidationError("max_seq_len must be >= 1");
    for (const auto& s : samples) {
        if (s.total() > max_seq_len) {
            throw ValidationError("sample \"" + s.id + "\" has " + std::to_string(s.total()) +
                                  " tokens, exceeding max_seq_len " +
                                  std::to_string(max_seq_len));
        }
        if (s.total() == 0) {
            throw ValidationError("sample \"" + s.id + "\" is empty");
        }
    }

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].total() != samples[b].total()) {
            return samples[a].total() > samples[b].total();
        }
        return samples[a].id < samples[b].id;
    });

    std::vector<PackedSequence> sequences;
    std::vector<std::size_t> used;
    for (std::size_t idx : order) {
        const auto& s = samples[idx];
        std::size_t bin = sequences.size();
        for (std::size_t b = 0; b < sequences.size(); ++b) {
            if (used[b] + s.total() <= max_seq_len) {
                bin = b;
                break;
            }
        }
        if (bin == sequences.size()) {
            sequences.emplace_back();
            used.push_back(0);
        }
        Segment seg;
        seg.sample_id = s.id;
        seg.begin = used[bin];
        seg.end = used[bin] + s.total();
        seg.question_len = s.question;
        sequences[bin].segments.push_back(std::move(seg));
        used[bin] += s.total();
    }

    for (auto& seq : sequences) {
        seq.loss_mask.assign(seq.length(), false);
        for (const auto& seg : seq.segments) {
            for (std::size_t t = seg.begin + seg.question_len; t < seg.end; ++t) {
                seq.loss_mask[t] = true;
            }
        }
    }
    return sequences;
}

/// Per-token segment index; positions share a value iff they share a segment.
/// Any trainer can expand this into a block-diagonal attention mask.
inline std::vector<int> emit_attention_metadata(const PackedSequence& seq) {
    std::vector<int> meta(seq.length(), -1);
    for (std::size_t s = 0; s < seq.segments.size(); ++s) {
        for (std::size_t t = seq.segments[s].begin; t < seq.segments[s].end; ++t) {
            meta[t] = static_cast<int>(s);
        }
    }
    return meta;
}

/// Visibility contract: token i may attend to token j iff both sit in the
/// same segment and j <= i.
inline bool visible(const PackedSequence& seq, std::size_t i, std::size_t j) {
    if (j > i) return false;
    for (const auto& seg : seq.segments) {
        if (i >= seg.begin && i < seg.end) {
            return j >= seg.begin && j < seg.end;
        }
    }
    return false;
}

inline void validate_packed(const PackedSequence& seq, std::size_t max_seq_len) {
    if (seq.length() > max_seq_len) {
        throw ValidationError("packed sequence exceeds max_seq_len");
    }
    std::size_t expected = 0;
    for (const auto& seg : seq.segments) {
        if (seg.begin != expected || seg.end <= seg.begin) {
            throw ValidationError("segments are not contiguous");
        }
        expected = seg.end;
    }
    if (seq.loss_mask.size() != seq.length()) {
        throw ValidationError("loss mask length mismatch");
    }
}

// ---------------------------------------------------------------------------
// Tokenized packing of CoT samples (the file-level interface)
// ---------------------------------------------------------------------------

/// Tokenizes samples with a shared vocabulary, packs them, and materializes
/// token ids per sequence. Sample ids fall back to the record id or a
/// positional id when absent. With pad_to_max, sequences are right-padded
/// with the pad id and loss_mask=false.
inline std::vector<PackedSequence> pack_samples(const std::vector<CoTSample>& samples,
                                                std::size_t max_seq_len,
                                                WhitespaceTokenizer& tokenizer,
                                                bool pad_to_max = false) {
    std::vector<SampleLengths> lengths;
    std::map<std::string, std::vector<int>> tokens;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        std::string id = s.provenance.record_id.empty() ? "sample-" + std::to_string(i)
                                                        : s.provenance.record_id;
        auto q = tokenizer.encode(s.question);
        auto t = tokenizer.encode(s.thinking);
        auto r = tokenizer.encode(s.response);
        SampleLengths l;
        l.id = id;
        l.question = q.size();
        l.thinking = t.size();
        l.response = r.size();
        lengths.push_back(l);
        auto [it, inserted] = tokens.try_emplace(id);
        if (!inserted) throw ValidationError("duplicate sample id \"" + id + "\"");
        auto& all = it->second;
        all.insert(all.end(), q.begin(), q.end());
        all.insert(all.end(), t.begin(), t.end());
        all.insert(all.end(), r.begin(), r.end());
    }

    auto sequences = pack(lengths, max_seq_len);
    for (auto& seq : sequences) {
        seq.token_ids.reserve(pad_to_max ? max_seq_len : seq.length());
        for (const auto& seg : seq.segments) {
            const auto& ids = tokens.at(seg.sample_id);
            seq.token_ids.insert(seq.token_ids.end(), ids.begin(), ids.end());
        }
        if (pad_to_max) {
            seq.token_ids.resize(max_seq_len, WhitespaceTokenizer::kPadId);
            seq.loss_mask.resize(max_seq_len, false);
        }
    }
    return sequences;
}

inline ordered_json to_json(const PackedSequence& seq) {
    ordered_json segments = ordered_json::array();
    for (const auto& s : seq.segments) {
        segments.push_back(ordered_json{{"sample_id", s.sample_id},
                                        {"begin", s.begin},
                                        {"end", s.end},
                                        {"question_len", s.question_len}});
    }
    std::vector<int> mask(seq.loss_mask.size());
    for (std::size_t i = 0; i < seq.loss_mask.size(); ++i) mask[i] = seq.loss_mask[i] ? 1 : 0;
    return ordered_json{{"token_ids", seq.token_ids},
                        {"segments", std::move(segments)},
                        {"loss_mask", std::move(mask)}};
}

}  // namespace cotforge
