#include "icd/events.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace icd {

const char* to_token(Side s) { return s == Side::Buy ? "B" : "S"; }
const char* to_token(Action a) { return a == Action::Submit ? "SUBMIT" : "CANCEL"; }
const char* to_name(Side s) { return s == Side::Buy ? "buy" : "sell"; }

namespace {

constexpr size_t kColumns = 6;
constexpr std::array<std::string_view, kColumns> kHeaderNames = {
    "day", "seq", "side", "action", "price", "size"};

size_t split_fields(std::string_view line, std::array<std::string_view, kColumns + 1>& out) {
    size_t n = 0;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (n < out.size()) out[n] = line.substr(start, i - start);
            ++n;
            start = i + 1;
        }
    }
    return n;
}

[[noreturn]] void fail(const std::string& what, size_t line) {
    throw ParseError(what + " at line " + std::to_string(line), line);
}

}  // namespace

EventStream parse_order_flow(std::istream& in) {
    std::string line;
    size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("missing header line", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    // Map header names to column positions; all six must appear exactly once.
    std::array<std::string_view, kColumns + 1> fields;
    if (split_fields(line, fields) != kColumns) fail("malformed header", line_no);
    std::array<size_t, kColumns> col{};
    std::array<bool, kColumns> seen{};
    for (size_t i = 0; i < kColumns; ++i) {
        bool matched = false;
        for (size_t k = 0; k < kColumns; ++k) {
            if (fields[i] == kHeaderNames[k]) {
                if (seen[k]) fail("duplicate header column '" + std::string(fields[i]) + "'", line_no);
                seen[k] = true;
                col[k] = i;
                matched = true;
                break;
            }
        }
        if (!matched) fail("unknown header column '" + std::string(fields[i]) + "'", line_no);
    }

    EventStream stream;
    DayCounts* day = nullptr;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;  // trailing newline

        if (split_fields(line, fields) != kColumns) fail("wrong column count", line_no);

        OrderEvent ev;

        const auto date = parse_date(fields[col[0]]);
        if (!date) fail("unparseable day '" + std::string(fields[col[0]]) + "'", line_no);
        ev.day = *date;

        const std::string_view seq_text = fields[col[1]];
        auto res = std::from_chars(seq_text.data(), seq_text.data() + seq_text.size(), ev.seq);
        if (res.ec != std::errc{} || res.ptr != seq_text.data() + seq_text.size() || ev.seq == 0)
            fail("unparseable seq '" + std::string(seq_text) + "'", line_no);

        const std::string_view side_text = fields[col[2]];
        if (side_text == "B") ev.side = Side::Buy;
        else if (side_text == "S") ev.side = Side::Sell;
        else fail("unknown side token '" + std::string(side_text) + "'", line_no);

        const std::string_view action_text = fields[col[3]];
        if (action_text == "SUBMIT") ev.action = Action::Submit;
        else if (action_text == "CANCEL") ev.action = Action::Cancel;
        else fail("unknown action token '" + std::string(action_text) + "'", line_no);

        const std::string_view price_text = fields[col[4]];
        if (!price_text.empty()) {
            double price = 0.0;
            auto pr = std::from_chars(price_text.data(), price_text.data() + price_text.size(), price);
            if (pr.ec != std::errc{} || pr.ptr != price_text.data() + price_text.size() || price < 0)
                fail("unparseable price '" + std::string(price_text) + "'", line_no);
            ev.price = price;
        }

        const std::string_view size_text = fields[col[5]];
        if (!size_text.empty()) {
            uint64_t size = 0;
            auto sr = std::from_chars(size_text.data(), size_text.data() + size_text.size(), size);
            if (sr.ec != std::errc{} || sr.ptr != size_text.data() + size_text.size() || size == 0)
                fail("unparseable size '" + std::string(size_text) + "'", line_no);
            ev.size = size;
        }

        if (day == nullptr || ev.day != day->day) {
            if (day != nullptr && ev.day < day->day)
                fail("day regression (" + to_string(ev.day) + " after " + to_string(day->day) + ")",
                     line_no);
            stream.day_offsets.push_back(stream.events.size());
            stream.per_day.push_back(DayCounts{ev.day});
            day = &stream.per_day.back();
        } else if (!stream.events.empty() && ev.seq <= stream.events.back().seq) {
            fail("sequence regression", line_no);
        }

        ++day->total;
        if (ev.side == Side::Buy) {
            if (ev.action == Action::Submit) ++day->buy_submits;
            else ++day->buy_cancels;
        } else {
            if (ev.action == Action::Submit) ++day->sell_submits;
            else ++day->sell_cancels;
        }
        stream.events.push_back(ev);
    }

    return stream;
}

EventStream parse_order_flow_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_order_flow(in);
}

EventStream parse_order_flow_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return parse_order_flow(in);
}

std::string serialize_order_flow(const EventStream& stream) {
    std::string out = "day,seq,side,action,price,size\n";
    char buf[64];
    for (const auto& ev : stream.events) {
        out += to_string(ev.day);
        out += ',';
        out += std::to_string(ev.seq);
        out += ',';
        out += to_token(ev.side);
        out += ',';
        out += to_token(ev.action);
        out += ',';
        if (ev.price) {
            auto res = std::to_chars(buf, buf + sizeof buf, *ev.price);
            out.append(buf, res.ptr);
        }
        out += ',';
        if (ev.size) out += std::to_string(*ev.size);
        out += '\n';
    }
    return out;
}

FlowSummary summarize(const EventStream& stream) {
    if (stream.events.empty()) throw std::invalid_argument("summarize: empty event stream");
    FlowSummary s;
    s.per_day = stream.per_day;
    for (const auto& day : stream.per_day) {
        s.buy.submits += day.buy_submits;
        s.buy.cancels += day.buy_cancels;
        s.sell.submits += day.sell_submits;
        s.sell.cancels += day.sell_cancels;
    }
    return s;
}

}  // namespace icd
