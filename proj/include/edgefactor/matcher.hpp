#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edgefactor/text.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

// Multi-pattern dictionary matcher: an Aho-Corasick automaton over token ids
// rather than characters, so "art" can never fire inside "heart". Immutable
// once built; find_terms is pure and safe to call concurrently from any
// number of workers.
class DictionaryMatcher {
public:
    // Per-worker scratch buffers. Reusing one across calls avoids reallocating
    // the dedup stamps for every document in a batch scan.
    struct Scratch {
        std::vector<std::uint32_t> stamp;
        std::uint32_t epoch = 0;
    };

    DictionaryMatcher() = default;

    static DictionaryMatcher build(const Thesaurus& thesaurus) {
        DictionaryMatcher m;
        m.term_bound_ = TermId(thesaurus.term_count());
        Builder b(m);
        for (TermId id = 0; id < thesaurus.term_count(); ++id)
            b.insert(thesaurus.terms[id].tokens(), id);
        b.finish();
        return m;
    }

    // Token sequences keyed by explicit term ids (ids need not be dense).
    static DictionaryMatcher build(std::span<const std::pair<TermId, TokenSeq>> patterns,
                                   TermId id_bound) {
        DictionaryMatcher m;
        m.term_bound_ = id_bound;
        Builder b(m);
        for (const auto& [id, tokens] : patterns)
            b.insert(tokens, id);
        b.finish();
        return m;
    }

    std::size_t pattern_count() const { return pattern_count_; }
    std::size_t node_count() const { return edge_begin_.empty() ? 0 : edge_begin_.size() - 1; }
    TermId term_bound() const { return term_bound_; }

    // The exact set (sorted, duplicates collapsed) of term ids whose token
    // sequence occurs contiguously in doc.
    std::vector<TermId> find_terms(const TokenSeq& doc) const {
        Scratch scratch;
        std::vector<TermId> out;
        find_terms(doc, scratch, out);
        return out;
    }

    void find_terms(const TokenSeq& doc, Scratch& scratch, std::vector<TermId>& out) const {
        out.clear();
        if (pattern_count_ == 0)
            return;
        if (scratch.stamp.size() != term_bound_) {
            scratch.stamp.assign(term_bound_, 0);
            scratch.epoch = 0;
        }
        std::uint32_t epoch = ++scratch.epoch;
        if (epoch == 0) { // wrapped
            scratch.stamp.assign(term_bound_, 0);
            epoch = scratch.epoch = 1;
        }
        std::uint32_t state = 0;
        for (const std::string& tok : doc) {
            auto it = token_ids_.find(tok);
            if (it == token_ids_.end()) {
                state = 0;
                continue;
            }
            state = step(state, it->second);
            for (std::uint32_t n = terms_end_[state] > terms_begin_[state] ? state : out_link_[state];
                 n != 0; n = out_link_[n]) {
                for (std::uint32_t k = terms_begin_[n]; k < terms_end_[n]; ++k) {
                    TermId t = term_list_[k];
                    if (scratch.stamp[t] != epoch) {
                        scratch.stamp[t] = epoch;
                        out.push_back(t);
                    }
                }
            }
        }
        std::sort(out.begin(), out.end());
    }

private:
    std::uint32_t step(std::uint32_t state, std::uint32_t token) const {
        while (true) {
            std::uint32_t next = edge_lookup(state, token);
            if (next != kNoEdge)
                return next;
            if (state == 0)
                return 0;
            state = fail_[state];
        }
    }

    static constexpr std::uint32_t kNoEdge = 0xffffffffu;

    std::uint32_t edge_lookup(std::uint32_t state, std::uint32_t token) const {
        std::uint32_t lo = edge_begin_[state], hi = edge_begin_[state + 1];
        while (lo < hi) {
            std::uint32_t mid = (lo + hi) / 2;
            if (edge_token_[mid] < token)
                lo = mid + 1;
            else
                hi = mid;
        }
        return (lo < edge_begin_[state + 1] && edge_token_[lo] == token) ? edge_next_[lo] : kNoEdge;
    }

    // Build-time trie with per-node ordered edge maps, flattened to CSR arrays
    // by finish() for compact cache-friendly matching.
    class Builder {
    public:
        explicit Builder(DictionaryMatcher& m) : m_(m) { nodes_.emplace_back(); }

        void insert(const TokenSeq& tokens, TermId id) {
            if (tokens.empty())
                return;
            std::uint32_t state = 0;
            for (const std::string& tok : tokens) {
                std::uint32_t tid = intern(tok);
                auto [it, inserted] = nodes_[state].edges.emplace(tid, std::uint32_t(nodes_.size()));
                if (inserted)
                    nodes_.emplace_back();
                state = it->second;
            }
            nodes_[state].terms.push_back(id);
            ++m_.pattern_count_;
        }

        void finish() {
            std::size_t n = nodes_.size();
            m_.fail_.assign(n, 0);
            m_.out_link_.assign(n, 0);
            m_.terms_begin_.assign(n, 0);
            m_.terms_end_.assign(n, 0);
            m_.edge_begin_.assign(n + 1, 0);

            std::size_t total_edges = 0, total_terms = 0;
            for (auto& node : nodes_) {
                total_edges += node.edges.size();
                std::sort(node.terms.begin(), node.terms.end());
                total_terms += node.terms.size();
            }
            m_.edge_token_.reserve(total_edges);
            m_.edge_next_.reserve(total_edges);
            m_.term_list_.reserve(total_terms);
            for (std::size_t i = 0; i < n; ++i) {
                m_.edge_begin_[i] = std::uint32_t(m_.edge_token_.size());
                for (auto& [tok, next] : nodes_[i].edges) {
                    m_.edge_token_.push_back(tok);
                    m_.edge_next_.push_back(next);
                }
                m_.terms_begin_[i] = std::uint32_t(m_.term_list_.size());
                m_.term_list_.insert(m_.term_list_.end(), nodes_[i].terms.begin(),
                                     nodes_[i].terms.end());
                m_.terms_end_[i] = std::uint32_t(m_.term_list_.size());
            }
            m_.edge_begin_[n] = std::uint32_t(m_.edge_token_.size());

            // BFS failure links; out_link points at the nearest suffix state
            // that carries terms, so match emission skips barren states.
            std::deque<std::uint32_t> queue;
            for (auto& [tok, next] : nodes_[0].edges)
                queue.push_back(next);
            while (!queue.empty()) {
                std::uint32_t u = queue.front();
                queue.pop_front();
                for (auto& [tok, v] : nodes_[u].edges) {
                    std::uint32_t f = m_.fail_[u];
                    while (true) {
                        std::uint32_t next = m_.edge_lookup(f, tok);
                        if (next != kNoEdge && next != v) {
                            m_.fail_[v] = next;
                            break;
                        }
                        if (f == 0) {
                            m_.fail_[v] = 0;
                            break;
                        }
                        f = m_.fail_[f];
                    }
                    std::uint32_t fv = m_.fail_[v];
                    m_.out_link_[v] = (m_.terms_end_[fv] > m_.terms_begin_[fv]) ? fv : m_.out_link_[fv];
                    queue.push_back(v);
                }
            }
        }

    private:
        std::uint32_t intern(const std::string& tok) {
            auto [it, inserted] = m_.token_ids_.emplace(tok, std::uint32_t(m_.token_ids_.size()));
            return it->second;
        }

        struct Node {
            std::map<std::uint32_t, std::uint32_t> edges;
            std::vector<TermId> terms;
        };
        DictionaryMatcher& m_;
        std::vector<Node> nodes_;
    };

    std::unordered_map<std::string, std::uint32_t> token_ids_;
    std::vector<std::uint32_t> edge_begin_, edge_token_, edge_next_;
    std::vector<std::uint32_t> fail_, out_link_;
    std::vector<std::uint32_t> terms_begin_, terms_end_;
    std::vector<TermId> term_list_;
    std::size_t pattern_count_ = 0;
    TermId term_bound_ = 0;
};

} // namespace edgefactor
