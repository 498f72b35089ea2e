#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "icd/dates.hpp"

namespace icd {

enum class Side : uint8_t { Buy, Sell };
enum class Action : uint8_t { Submit, Cancel };

const char* to_token(Side s);    // "B" / "S"
const char* to_token(Action a);  // "SUBMIT" / "CANCEL"
const char* to_name(Side s);     // "buy" / "sell"

// One order-flow record. price and size are carried through but never used
// by the analyses; the event clock ticks once per record.
struct OrderEvent {
    Date day;
    uint64_t seq = 0;
    Side side = Side::Buy;
    Action action = Action::Submit;
    std::optional<double> price;
    std::optional<uint64_t> size;

    bool operator==(const OrderEvent&) const = default;
};

struct DayCounts {
    Date day;
    uint64_t total = 0;
    uint64_t buy_submits = 0;
    uint64_t buy_cancels = 0;
    uint64_t sell_submits = 0;
    uint64_t sell_cancels = 0;

    bool operator==(const DayCounts&) const = default;
};

// Parsed order-flow log. Events are kept in file order, grouped by day;
// days are strictly increasing and seq is strictly increasing within a day.
struct EventStream {
    std::vector<OrderEvent> events;
    std::vector<DayCounts> per_day;
    std::vector<size_t> day_offsets;  // index of each day's first event

    size_t day_count() const { return per_day.size(); }
    bool operator==(const EventStream&) const = default;
};

// Parse failure with a 1-based line number (the header is line 1).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, size_t line)
        : std::runtime_error(msg), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// CSV header: day,seq,side,action,price,size (any column order).
EventStream parse_order_flow(std::istream& in);
EventStream parse_order_flow_text(std::string_view text);
EventStream parse_order_flow_file(const std::string& path);

std::string serialize_order_flow(const EventStream& stream);

struct SideCounts {
    uint64_t submits = 0;
    uint64_t cancels = 0;
    uint64_t all() const { return submits + cancels; }
};

struct FlowSummary {
    SideCounts buy;
    SideCounts sell;
    std::vector<DayCounts> per_day;

    const SideCounts& side(Side s) const { return s == Side::Buy ? buy : sell; }
};

FlowSummary summarize(const EventStream& stream);

}  // namespace icd
