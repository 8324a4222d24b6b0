#pragma once

#include "symdyn/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace symdyn {

using Sym = std::uint8_t;

struct Alphabet {
    int size = 2;  // symbols are 0..size-1

    explicit Alphabet(int n = 2) : size(n) {
        if (n < 1 || n > 255) throw DomainError("Alphabet: size out of range");
    }
    bool operator==(const Alphabet& o) const { return size == o.size; }
};

// Finite word over an alphabet.  Serialization: plain digit strings for
// alphabets of size <= 10, comma-separated integers otherwise.
struct Word {
    std::vector<Sym> syms;

    Word() = default;
    explicit Word(std::vector<Sym> s) : syms(std::move(s)) {}

    std::size_t size() const { return syms.size(); }
    bool empty() const { return syms.empty(); }
    Sym operator[](std::size_t i) const { return syms[i]; }
    auto begin() const { return syms.begin(); }
    auto end() const { return syms.end(); }
    bool operator==(const Word& o) const { return syms == o.syms; }
    bool operator<(const Word& o) const { return syms < o.syms; }

    void push(Sym s) { syms.push_back(s); }
    Word sub(std::size_t pos, std::size_t len) const {
        return Word(std::vector<Sym>(syms.begin() + pos, syms.begin() + pos + len));
    }
    Word operator+(const Word& o) const {
        Word r = *this;
        r.syms.insert(r.syms.end(), o.syms.begin(), o.syms.end());
        return r;
    }
    Word repeated(std::size_t times) const {
        Word r;
        r.syms.reserve(size() * times);
        for (std::size_t t = 0; t < times; ++t)
            r.syms.insert(r.syms.end(), syms.begin(), syms.end());
        return r;
    }

    bool valid_over(const Alphabet& a) const {
        return std::all_of(syms.begin(), syms.end(),
                           [&](Sym s) { return s < a.size; });
    }

    static Word parse(const std::string& text, const Alphabet& a) {
        Word w;
        if (a.size <= 10) {
            for (char c : text) {
                if (c < '0' || c > '9') throw DomainError("Word::parse: bad digit");
                w.push(static_cast<Sym>(c - '0'));
            }
        } else {
            std::stringstream ss(text);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                int v = std::stoi(tok);
                if (v < 0 || v > 255) throw DomainError("Word::parse: symbol out of range");
                w.push(static_cast<Sym>(v));
            }
        }
        if (!w.valid_over(a)) throw DomainError("Word::parse: symbol exceeds alphabet");
        return w;
    }

    std::string str(const Alphabet& a) const {
        std::string out;
        if (a.size <= 10) {
            for (Sym s : syms) out.push_back(static_cast<char>('0' + s));
        } else {
            for (std::size_t i = 0; i < syms.size(); ++i) {
                if (i) out.push_back(',');
                out += std::to_string(static_cast<int>(syms[i]));
            }
        }
        return out;
    }
};

inline Word word_of(std::initializer_list<int> xs) {
    Word w;
    for (int x : xs) w.push(static_cast<Sym>(x));
    return w;
}

// Length-lexicographic enumeration of nonempty words, 1-based; this is the
// canonical order of the separating cylinder family.
inline Word lengthlex_word(const Alphabet& a, const Int& index) {
    if (index < 1) throw DomainError("lengthlex_word: index < 1");
    Int n = a.size;
    Int remaining = index - 1;
    std::size_t len = 1;
    Int block = n;
    while (remaining >= block) {
        remaining -= block;
        block *= n;
        ++len;
        if (len > 4096) throw BudgetError("lengthlex_word: index too large");
    }
    Word w;
    w.syms.assign(len, 0);
    for (std::size_t i = len; i-- > 0;) {
        Int digit = remaining % n;
        remaining /= n;
        w.syms[i] = static_cast<Sym>(static_cast<unsigned>(digit));
    }
    return w;
}

inline Int lengthlex_index(const Alphabet& a, const Word& w) {
    if (w.empty()) throw DomainError("lengthlex_index: empty word");
    Int n = a.size;
    Int before = 0, block = n;
    for (std::size_t l = 1; l < w.size(); ++l) {
        before += block;
        block *= n;
    }
    Int offset = 0;
    for (Sym s : w.syms) offset = offset * n + s;
    return before + offset + 1;
}

// All words of a given length, lexicographic order (small lengths only).
inline std::vector<Word> all_words(const Alphabet& a, std::size_t len) {
    std::vector<Word> out;
    Word cur;
    cur.syms.assign(len, 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = len;
        while (i > 0) {
            if (cur.syms[i - 1] + 1 < a.size) {
                ++cur.syms[i - 1];
                std::fill(cur.syms.begin() + i, cur.syms.end(), 0);
                break;
            }
            --i;
        }
        if (i == 0) break;
    }
    if (len == 0) return {Word{}};
    return out;
}

}  // namespace symdyn
