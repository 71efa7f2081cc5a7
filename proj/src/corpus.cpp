#include "claimmatch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "claimmatch/error.hpp"
#include "claimmatch/textproc.hpp"

namespace claimmatch {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Lang lang) {
    switch (lang) {
        case Lang::en: return "en";
        case Lang::hi: return "hi";
        case Lang::es: return "es";
        case Lang::pt: return "pt";
    }
    return "?";
}

Lang parse_lang(std::string_view code) {
    if (code == "en") return Lang::en;
    if (code == "hi") return Lang::hi;
    if (code == "es") return Lang::es;
    if (code == "pt") return Lang::pt;
    throw data_error("unsupported language code '" + std::string(code) + "' (expected en, hi, es or pt)");
}

std::string LangPair::tag() const {
    return std::string(to_string(tweet)) + "-" + std::string(to_string(article));
}

LangPair LangPair::parse(std::string_view tag) {
    auto dash = tag.find('-');
    if (dash == std::string_view::npos) throw usage_error("bad partition tag '" + std::string(tag) + "'");
    return {parse_lang(tag.substr(0, dash)), parse_lang(tag.substr(dash + 1))};
}

std::string_view to_string(Label label) { return label == Label::match ? "match" : "not_match"; }

std::string_view to_string(PairSource source) {
    switch (source) {
        case PairSource::ingested: return "ingested";
        case PairSource::mined_random: return "mined_random";
        case PairSource::mined_hard: return "mined_hard";
    }
    return "?";
}

namespace {

Label parse_label(std::string_view s) {
    if (s == "match") return Label::match;
    if (s == "not_match") return Label::not_match;
    throw data_error("unknown label '" + std::string(s) + "'");
}

PairSource parse_source(std::string_view s) {
    if (s == "ingested") return PairSource::ingested;
    if (s == "mined_random") return PairSource::mined_random;
    if (s == "mined_hard") return PairSource::mined_hard;
    throw data_error("unknown pair source '" + std::string(s) + "'");
}

std::string where(std::size_t line) { return line ? "line " + std::to_string(line) + ": " : std::string(); }

bool blank(std::string_view s) { return trim(s).empty(); }

void check_tweet(const Tweet& t, std::size_t line) {
    if (t.id.empty()) throw data_error(where(line) + "tweet id is empty");
    if (blank(t.text)) throw data_error(where(line) + "tweet '" + t.id + "' has empty text");
}

void check_article(const Article& a, std::size_t line) {
    if (a.id.empty()) throw data_error(where(line) + "article id is empty");
    if (std::all_of(a.body.begin(), a.body.end(), [](const std::string& p) { return blank(p); })) {
        throw data_error(where(line) + "article '" + a.id + "' has no nonempty paragraph");
    }
}

}  // namespace

namespace detail {

struct Lines {
    std::vector<std::size_t> tweets;
    std::vector<std::size_t> articles;
    std::vector<std::size_t> pairs;

    static std::size_t at(const std::vector<std::size_t>& v, std::size_t i) { return i < v.size() ? v[i] : 0; }
};

}  // namespace detail

// Shared by from_parts and ingest; line numbers are optional context.
static Corpus build_corpus(std::vector<Tweet> tweets, std::vector<Article> articles, std::vector<Pair> pairs,
                           const detail::Lines& lines);

Corpus Corpus::from_parts(std::vector<Tweet> tweets, std::vector<Article> articles, std::vector<Pair> pairs) {
    return build_corpus(std::move(tweets), std::move(articles), std::move(pairs), detail::Lines{});
}

struct CorpusAccess {
    static Corpus make() { return Corpus(); }
    static auto& tweets(Corpus& c) { return c.tweets_; }
    static auto& articles(Corpus& c) { return c.articles_; }
    static auto& pairs(Corpus& c) { return c.pairs_; }
    static auto& tweet_index(Corpus& c) { return c.tweet_index_; }
    static auto& article_index(Corpus& c) { return c.article_index_; }
    static auto& partitions(Corpus& c) { return c.partitions_; }
};

static Corpus build_corpus(std::vector<Tweet> tweets, std::vector<Article> articles, std::vector<Pair> pairs,
                           const detail::Lines& lines) {
    Corpus c = CorpusAccess::make();
    auto& tweet_index = CorpusAccess::tweet_index(c);
    auto& article_index = CorpusAccess::article_index(c);
    std::set<std::string, std::less<>> ids;

    for (std::size_t i = 0; i < tweets.size(); ++i) {
        std::size_t line = detail::Lines::at(lines.tweets, i);
        check_tweet(tweets[i], line);
        if (!ids.insert(tweets[i].id).second) throw data_error(where(line) + "duplicate id '" + tweets[i].id + "'");
        tweet_index.emplace(tweets[i].id, i);
    }
    for (std::size_t i = 0; i < articles.size(); ++i) {
        std::size_t line = detail::Lines::at(lines.articles, i);
        check_article(articles[i], line);
        if (!ids.insert(articles[i].id).second) {
            throw data_error(where(line) + "duplicate id '" + articles[i].id + "'");
        }
        article_index.emplace(articles[i].id, i);
    }

    auto& partitions = CorpusAccess::partitions(c);
    std::map<std::string, std::pair<std::set<std::size_t>, std::set<std::size_t>>> members;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::size_t line = detail::Lines::at(lines.pairs, i);
        const Pair& p = pairs[i];
        auto t = tweet_index.find(p.tweet_id);
        if (t == tweet_index.end()) {
            throw data_error(where(line) + "pair references unknown tweet id '" + p.tweet_id + "'");
        }
        auto a = article_index.find(p.article_id);
        if (a == article_index.end()) {
            throw data_error(where(line) + "pair references unknown article id '" + p.article_id + "'");
        }
        if (p.label != Label::match) {
            throw data_error(where(line) + "corpus pairs must be labeled match (" + p.tweet_id + ", " +
                             p.article_id + ")");
        }
        LangPair langs{tweets[t->second].lang, articles[a->second].lang};
        auto tag = langs.tag();
        auto& part = partitions[tag];
        part.langs = langs;
        part.pairs.push_back(i);
        members[tag].first.insert(t->second);
        members[tag].second.insert(a->second);
    }
    for (auto& [tag, m] : members) {
        auto& part = partitions[tag];
        part.tweets.assign(m.first.begin(), m.first.end());
        part.articles.assign(m.second.begin(), m.second.end());
        std::sort(part.tweets.begin(), part.tweets.end(),
                  [&](std::size_t x, std::size_t y) { return tweets[x].id < tweets[y].id; });
        std::sort(part.articles.begin(), part.articles.end(),
                  [&](std::size_t x, std::size_t y) { return articles[x].id < articles[y].id; });
    }

    CorpusAccess::tweets(c) = std::move(tweets);
    CorpusAccess::articles(c) = std::move(articles);
    CorpusAccess::pairs(c) = std::move(pairs);
    return c;
}

const Tweet* Corpus::find_tweet(std::string_view id) const {
    auto it = tweet_index_.find(std::string(id));
    return it == tweet_index_.end() ? nullptr : &tweets_[it->second];
}

const Article* Corpus::find_article(std::string_view id) const {
    auto it = article_index_.find(std::string(id));
    return it == article_index_.end() ? nullptr : &articles_[it->second];
}

const Tweet& Corpus::tweet(std::string_view id) const {
    if (auto* t = find_tweet(id)) return *t;
    throw data_error("unknown tweet id '" + std::string(id) + "'");
}

const Article& Corpus::article(std::string_view id) const {
    if (auto* a = find_article(id)) return *a;
    throw data_error("unknown article id '" + std::string(id) + "'");
}

const Partition& Corpus::partition(std::string_view tag) const {
    auto it = partitions_.find(std::string(tag));
    if (it == partitions_.end()) throw data_error("corpus has no pairs in partition '" + std::string(tag) + "'");
    return it->second;
}

std::vector<PairKey> Corpus::positive_keys(std::string_view partition_tag) const {
    const Partition& part = partition(partition_tag);
    std::vector<PairKey> keys;
    keys.reserve(part.pairs.size());
    for (std::size_t i : part.pairs) keys.push_back(key_of(pairs_[i]));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

namespace {

std::string require_string(const json& rec, const char* field, std::size_t line) {
    auto it = rec.find(field);
    if (it == rec.end()) throw data_error(where(line) + "missing field '" + field + "'");
    if (!it->is_string()) throw data_error(where(line) + "field '" + field + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& rec, const char* field, std::size_t line) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw data_error(where(line) + "field '" + field + "' must be a string");
    return it->get<std::string>();
}

class UnknownFieldReporter {
public:
    void check(const json& rec, std::string_view kind, std::initializer_list<std::string_view> known,
               std::size_t line) {
        for (auto it = rec.begin(); it != rec.end(); ++it) {
            if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
            std::string key = std::string(kind) + "." + it.key();
            if (seen_.insert(key).second) {
                warn(where(line) + "ignoring unknown field '" + it.key() + "' in " + std::string(kind) +
                     " record");
            }
        }
    }

private:
    std::set<std::string> seen_;
};

Pair parse_pair(const json& rec, std::size_t line) {
    Pair p;
    p.tweet_id = require_string(rec, "tweet_id", line);
    p.article_id = require_string(rec, "article_id", line);
    try {
        if (auto label = optional_string(rec, "label", line)) p.label = parse_label(*label);
        if (auto source = optional_string(rec, "source", line)) p.source = parse_source(*source);
    } catch (const Error& e) {
        throw data_error(where(line) + e.what());
    }
    if (auto it = rec.find("similarity"); it != rec.end() && !it->is_null()) {
        if (!it->is_number()) throw data_error(where(line) + "field 'similarity' must be a number");
        p.similarity = it->get<double>();
    }
    return p;
}

json parse_line(const std::string& raw, std::size_t line) {
    json rec;
    try {
        rec = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw data_error(where(line) + "malformed JSON: " + e.what());
    }
    if (!rec.is_object()) throw data_error(where(line) + "record must be a JSON object");
    return rec;
}

// Iterates nonblank lines, stripping a UTF-8 BOM on the first one.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (line == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) {
            warn("line 1: ignoring UTF-8 byte order mark");
            raw.erase(0, 3);
        }
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (trim(raw).empty()) continue;
        fn(parse_line(raw, line), line);
    }
}

}  // namespace

Corpus ingest_corpus(std::istream& in) {
    std::vector<Tweet> tweets;
    std::vector<Article> articles;
    std::vector<Pair> pairs;
    detail::Lines lines;
    UnknownFieldReporter unknown;

    for_each_record(in, [&](const json& rec, std::size_t line) {
        std::string kind = require_string(rec, "kind", line);
        try {
            if (kind == "tweet") {
                unknown.check(rec, kind, {"kind", "id", "lang", "text", "link_preview"}, line);
                Tweet t;
                t.id = require_string(rec, "id", line);
                t.lang = parse_lang(require_string(rec, "lang", line));
                t.text = require_string(rec, "text", line);
                t.link_preview = optional_string(rec, "link_preview", line);
                tweets.push_back(std::move(t));
                lines.tweets.push_back(line);
            } else if (kind == "article") {
                unknown.check(rec, kind, {"kind", "id", "lang", "title", "body"}, line);
                Article a;
                a.id = require_string(rec, "id", line);
                a.lang = parse_lang(require_string(rec, "lang", line));
                a.title = optional_string(rec, "title", line);
                auto body = rec.find("body");
                if (body == rec.end() || !body->is_array()) {
                    throw data_error("field 'body' must be an array of strings");
                }
                for (const auto& para : *body) {
                    if (!para.is_string()) throw data_error("field 'body' must be an array of strings");
                    a.body.push_back(para.get<std::string>());
                }
                articles.push_back(std::move(a));
                lines.articles.push_back(line);
            } else if (kind == "pair") {
                unknown.check(rec, kind, {"kind", "tweet_id", "article_id", "label", "source", "similarity"},
                              line);
                pairs.push_back(parse_pair(rec, line));
                lines.pairs.push_back(line);
            } else {
                throw data_error("unsupported record kind '" + kind + "'");
            }
        } catch (const Error& e) {
            std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            throw Error(e.kind(), where(line) + msg);
        }
    });
    return build_corpus(std::move(tweets), std::move(articles), std::move(pairs), lines);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open corpus file '" + path + "'");
    try {
        return ingest_corpus(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

namespace {

ordered_json pair_record(const Pair& p) {
    ordered_json rec;
    rec["kind"] = "pair";
    rec["tweet_id"] = p.tweet_id;
    rec["article_id"] = p.article_id;
    rec["label"] = to_string(p.label);
    if (p.source != PairSource::ingested) rec["source"] = to_string(p.source);
    if (p.similarity) rec["similarity"] = *p.similarity;
    return rec;
}

void write_line(std::ostream& out, const ordered_json& rec) {
    out << rec.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

}  // namespace

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const Tweet& t : corpus.tweets()) {
        ordered_json rec;
        rec["kind"] = "tweet";
        rec["id"] = t.id;
        rec["lang"] = to_string(t.lang);
        rec["text"] = t.text;
        if (t.link_preview) rec["link_preview"] = *t.link_preview;
        write_line(out, rec);
    }
    for (const Article& a : corpus.articles()) {
        ordered_json rec;
        rec["kind"] = "article";
        rec["id"] = a.id;
        rec["lang"] = to_string(a.lang);
        if (a.title) rec["title"] = *a.title;
        rec["body"] = a.body;
        write_line(out, rec);
    }
    for (const Pair& p : corpus.pairs()) write_line(out, pair_record(p));
}

std::string query_text(const Tweet& tweet) {
    if (!tweet.link_preview || trim(*tweet.link_preview).empty()) return tweet.text;
    std::string out(rtrim(tweet.text));
    out += ' ';
    out += trim(*tweet.link_preview);
    return out;
}

std::vector<std::string> chunkable_paragraphs(const Article& article, bool include_title) {
    std::vector<std::string> paras;
    paras.reserve(article.body.size() + 1);
    if (include_title && article.title && !blank(*article.title)) paras.push_back(*article.title);
    paras.insert(paras.end(), article.body.begin(), article.body.end());
    return paras;
}

std::string article_text(const Article& article, bool include_title) {
    std::string out;
    for (const std::string& p : chunkable_paragraphs(article, include_title)) {
        if (blank(p)) continue;
        if (!out.empty()) out += kParagraphSeparator;
        out += p;
    }
    return out;
}

namespace {

bool is_terminal(char32_t cp) { return cp == '.' || cp == '!' || cp == '?' || cp == 0x0964 || cp == 0x0965; }

bool is_space_byte(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Sentence end offsets: just past the whitespace that follows terminal
// punctuation. The last entry is always text.size().
std::vector<std::size_t> sentence_ends(std::string_view text) {
    std::vector<std::size_t> ends;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = next_code_point(text, pos);
        if (!is_terminal(cp)) continue;
        if (pos >= text.size() || !is_space_byte(text[pos])) continue;
        while (pos < text.size() && is_space_byte(text[pos])) ++pos;
        if (pos < text.size()) ends.push_back(pos);
    }
    ends.push_back(text.size());
    return ends;
}

}  // namespace

std::vector<ParagraphChunk> chunk_article(const Article& article, const ChunkConfig& cfg) {
    if (cfg.token_limit < 1) throw usage_error("chunk token limit must be at least 1");
    const std::size_t limit = cfg.token_limit;
    std::vector<ParagraphChunk> chunks;
    auto paragraphs = chunkable_paragraphs(article, cfg.include_title);

    for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
        std::string_view para = paragraphs[pi];
        if (blank(para)) continue;
        auto emit = [&](std::string_view text, std::size_t tokens) {
            chunks.push_back(ParagraphChunk{article.id, chunks.size(), pi, std::string(text), tokens});
        };
        auto tokens = tokenize(para);
        if (tokens.size() <= limit) {
            emit(para, tokens.size());
            continue;
        }

        std::size_t piece_begin = 0;
        std::size_t piece_tokens = 0;
        auto flush = [&](std::size_t end) {
            emit(para.substr(piece_begin, end - piece_begin), piece_tokens);
            piece_begin = end;
            piece_tokens = 0;
        };

        std::size_t next_token = 0;
        std::size_t sentence_begin = 0;
        for (std::size_t sentence_end : sentence_ends(para)) {
            std::size_t first = next_token;
            while (next_token < tokens.size() && tokens[next_token].span.begin < sentence_end) ++next_token;
            std::size_t n = next_token - first;

            if (piece_tokens + n <= limit) {
                piece_tokens += n;
            } else {
                if (piece_tokens > 0) flush(sentence_begin);
                std::size_t k = first;
                while (next_token - k > limit) {
                    piece_tokens = limit;
                    flush(tokens[k + limit].span.begin);
                    k += limit;
                }
                piece_tokens = next_token - k;
            }
            sentence_begin = sentence_end;
        }
        flush(para.size());
    }
    return chunks;
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport r;
    r.n_tweets = corpus.tweets().size();
    r.n_articles = corpus.articles().size();
    r.n_pairs = corpus.pairs().size();
    for (const auto& [tag, part] : corpus.partitions()) r.partitions.push_back({tag, part.pairs.size()});

    std::set<std::string_view> used_tweets;
    std::set<std::string_view> used_articles;
    std::map<PairKey, std::size_t> seen;
    for (const Pair& p : corpus.pairs()) {
        used_tweets.insert(p.tweet_id);
        used_articles.insert(p.article_id);
        if (++seen[key_of(p)] == 2) r.duplicate_pairs.push_back(key_of(p));
    }
    for (const Tweet& t : corpus.tweets()) {
        if (!used_tweets.count(t.id)) r.orphan_tweets.push_back(t.id);
    }
    for (const Article& a : corpus.articles()) {
        if (!used_articles.count(a.id)) r.orphan_articles.push_back(a.id);
    }
    return r;
}

std::string ValidationReport::to_json() const {
    ordered_json j;
    j["tweets"] = n_tweets;
    j["articles"] = n_articles;
    j["pairs"] = n_pairs;
    ordered_json parts = ordered_json::object();
    for (const auto& p : partitions) parts[p.partition] = p.pairs;
    j["partitions"] = parts;
    j["orphan_tweets"] = orphan_tweets;
    j["orphan_articles"] = orphan_articles;
    ordered_json dups = ordered_json::array();
    for (const auto& [t, a] : duplicate_pairs) dups.push_back({t, a});
    j["duplicate_pairs"] = dups;
    return j.dump(2);
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out << "tweets " << n_tweets << ", articles " << n_articles << ", pairs " << n_pairs << '\n';
    for (const auto& p : partitions) out << "  partition " << p.partition << ": " << p.pairs << " pairs\n";
    auto list = [&](const char* name, const std::vector<std::string>& ids) {
        out << name << ": " << ids.size();
        for (const auto& id : ids) out << ' ' << id;
        out << '\n';
    };
    list("orphan tweets", orphan_tweets);
    list("orphan articles", orphan_articles);
    out << "duplicate pairs: " << duplicate_pairs.size();
    for (const auto& [t, a] : duplicate_pairs) out << " (" << t << ", " << a << ")";
    out << '\n';
    return out.str();
}

std::size_t LabeledDataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [&](const Pair& p) { return p.label == label; }));
}

void write_dataset(const LabeledDataset& dataset, std::ostream& out) {
    for (const Pair& p : dataset.pairs) write_line(out, pair_record(p));
}

LabeledDataset read_dataset(std::istream& in, const Corpus& corpus, std::string partition) {
    LabeledDataset ds;
    std::map<PairKey, Label> labels;
    std::set<std::string> tags;
    for_each_record(in, [&](const json& rec, std::size_t line) {
        if (require_string(rec, "kind", line) != "pair") {
            throw data_error(where(line) + "dataset files hold pair records only");
        }
        Pair p = parse_pair(rec, line);
        const Tweet* t = corpus.find_tweet(p.tweet_id);
        const Article* a = corpus.find_article(p.article_id);
        if (!t) throw data_error(where(line) + "pair references unknown tweet id '" + p.tweet_id + "'");
        if (!a) throw data_error(where(line) + "pair references unknown article id '" + p.article_id + "'");
        auto [it, inserted] = labels.emplace(key_of(p), p.label);
        if (!inserted) {
            throw data_error(where(line) + (it->second == p.label ? "duplicate pair (" : "pair with both labels (") +
                             p.tweet_id + ", " + p.article_id + ")");
        }
        tags.insert(LangPair{t->lang, a->lang}.tag());
        ds.pairs.push_back(std::move(p));
    });
    if (partition.empty()) partition = tags.size() == 1 ? *tags.begin() : "all";
    ds.partition = std::move(partition);
    return ds;
}

}  // namespace claimmatch
