#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "edgefactor/common.hpp"
#include "edgefactor/vocab.hpp"

namespace edgefactor {

// One matches.bin record: everything downstream stages need, so the corpus
// JSONL is parsed exactly once per scan. Terms are sorted term ids.
struct ScanRecord {
    std::string paper_id;
    std::int32_t year = 0;
    std::string journal;
    std::string affiliation;
    bool original_research = true;
    bool status_h = false, status_a = false, status_c = false;
    std::uint32_t char_count = 0;
    std::vector<TermId> terms;
};

namespace scan_io {

inline constexpr char kMagic[8] = {'E', 'F', 'M', 'A', 'T', 'C', 'H', '1'};
inline constexpr std::uint32_t kVersion = 1;

inline void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_i32(std::ostream& out, std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, std::uint32_t(s.size()));
    out.write(s.data(), std::streamsize(s.size()));
}

inline bool get_u32(std::istream& in, std::uint32_t& v) {
    return bool(in.read(reinterpret_cast<char*>(&v), sizeof v));
}
inline bool get_i32(std::istream& in, std::int32_t& v) {
    return bool(in.read(reinterpret_cast<char*>(&v), sizeof v));
}
inline constexpr std::uint32_t kMaxFieldBytes = 1u << 24;

inline bool get_str(std::istream& in, std::string& s) {
    std::uint32_t n = 0;
    if (!get_u32(in, n))
        return false;
    if (n > kMaxFieldBytes)
        throw PipelineError("matches file: implausible field length (corrupt file?)");
    s.resize(n);
    return n == 0 || bool(in.read(s.data(), std::streamsize(n)));
}

} // namespace scan_io

inline void write_scan_header(std::ostream& out) {
    out.write(scan_io::kMagic, sizeof scan_io::kMagic);
    scan_io::put_u32(out, scan_io::kVersion);
    scan_io::put_u32(out, 0);
}

inline void write_scan_record(std::ostream& out, const ScanRecord& rec) {
    using namespace scan_io;
    put_str(out, rec.paper_id);
    put_i32(out, rec.year);
    put_str(out, rec.journal);
    put_str(out, rec.affiliation);
    std::uint32_t flags = (rec.original_research ? 1u : 0u) | (rec.status_h ? 2u : 0u) |
                          (rec.status_a ? 4u : 0u) | (rec.status_c ? 8u : 0u);
    put_u32(out, flags);
    put_u32(out, rec.char_count);
    put_u32(out, std::uint32_t(rec.terms.size()));
    for (TermId t : rec.terms)
        put_u32(out, t);
}

class ScanReader {
public:
    explicit ScanReader(std::istream& in) : in_(in) {
        char magic[8];
        std::uint32_t version = 0, reserved = 0;
        if (!in_.read(magic, sizeof magic) || std::memcmp(magic, scan_io::kMagic, 8) != 0)
            throw PipelineError("matches file: bad magic (not a scan table)");
        if (!scan_io::get_u32(in_, version) || version != scan_io::kVersion ||
            !scan_io::get_u32(in_, reserved))
            throw PipelineError("matches file: unsupported version");
    }

    // False at clean EOF; throws on a truncated record.
    bool next(ScanRecord& rec) {
        using namespace scan_io;
        if (!get_str(in_, rec.paper_id)) {
            if (in_.eof())
                return false;
            throw PipelineError("matches file: read error");
        }
        std::uint32_t flags = 0, n_terms = 0;
        if (!get_i32(in_, rec.year) || !get_str(in_, rec.journal) ||
            !get_str(in_, rec.affiliation) || !get_u32(in_, flags) ||
            !get_u32(in_, rec.char_count) || !get_u32(in_, n_terms))
            throw PipelineError("matches file: truncated record");
        rec.original_research = flags & 1u;
        rec.status_h = flags & 2u;
        rec.status_a = flags & 4u;
        rec.status_c = flags & 8u;
        if (n_terms > scan_io::kMaxFieldBytes)
            throw PipelineError("matches file: implausible term count (corrupt file?)");
        rec.terms.resize(n_terms);
        for (std::uint32_t i = 0; i < n_terms; ++i)
            if (!get_u32(in_, rec.terms[i]))
                throw PipelineError("matches file: truncated term list");
        return true;
    }

private:
    std::istream& in_;
};

} // namespace edgefactor
