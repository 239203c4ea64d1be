"""Regenerate data/sample_cdr.csv: six months of synthetic call detail.

The monthly mix is fixed (19 same-network + 6 other-mobile + 8 landline
calls on workdays, 4 + 1 + 1 on weekends, plus a couple of SMS rows) so the
derived traffic profile is stable: 39 calls/month, 23 to the home network,
16 elsewhere, 33 on workdays. Durations are exponential with mean 2.45
minutes; costs are billed at the current plan's workday/weekend rates.
"""

from pathlib import Path

import numpy as np

MONTHS = [(2010, 3), (2010, 4), (2010, 5), (2010, 6), (2010, 7), (2010, 8)]
MEAN_MINUTES = 2.45

# (destination prefixes, workday calls, weekend calls) per month
MIX = [
    (("+7916555", "+7985221", "+7910330"), 19, 4),   # same-network
    (("+7926777", "+7903118", "+7905414"), 6, 1),    # other mobile
    (("+7495632", "+7499250"), 8, 1),                # landline
]


def month_days(year, month):
    import calendar

    n = calendar.monthrange(year, month)[1]
    import datetime

    days = [datetime.date(year, month, d) for d in range(1, n + 1)]
    workdays = [d for d in days if d.weekday() < 5]
    weekends = [d for d in days if d.weekday() >= 5]
    return workdays, weekends


def main():
    rng = np.random.default_rng(20100301)
    rows = []
    for year, month in MONTHS:
        workdays, weekends = month_days(year, month)
        for prefixes, n_work, n_weekend in MIX:
            for day_pool, count in ((workdays, n_work), (weekends, n_weekend)):
                for _ in range(count):
                    day = day_pool[rng.integers(len(day_pool))]
                    seconds = max(1, int(round(rng.exponential(MEAN_MINUTES * 60))))
                    number = prefixes[rng.integers(len(prefixes))] + f"{rng.integers(100):02d}"
                    hh, mm, ss = rng.integers(8, 23), rng.integers(60), rng.integers(60)
                    rate = 3.0 if day.weekday() < 5 else 1.0
                    rows.append(
                        (
                            day,
                            f"{hh:02d}:{mm:02d}:{ss:02d}",
                            number,
                            "Moscow",
                            "Tel",
                            f"{seconds // 60}:{seconds % 60:02d}",
                            f"{rate:.3f}",
                        )
                    )
        # a couple of SMS rows per month; the duration column holds a count
        for _ in range(2):
            day = workdays[rng.integers(len(workdays))]
            hh, mm, ss = rng.integers(8, 23), rng.integers(60), rng.integers(60)
            rows.append(
                (day, f"{hh:02d}:{mm:02d}:{ss:02d}", "+79167770001", "", "SMS", "1", "1.652")
            )

    rows.sort(key=lambda r: (r[0], r[1]))
    out = Path(__file__).resolve().parents[1] / "data" / "sample_cdr.csv"
    with out.open("w", encoding="utf-8") as fh:
        fh.write("date;time;number;zone;service;duration;cost\n")
        for day, at, number, zone, service, duration, cost in rows:
            fh.write(f"{day.strftime('%d.%m.%Y')};{at};{number};{zone};{service};{duration};{cost}\n")
    tel = sum(1 for r in rows if r[4] == "Tel")
    print(f"wrote {out} ({len(rows)} rows, {tel} calls)")


if __name__ == "__main__":
    main()
