#!/usr/bin/env python3
"""Regenerates data/gazetteer.json and data/profiles.json.

All entries are synthetic. Given names are chosen so they do not collide with
ordinary English words that could appear in a math word problem.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

GIVEN = [
    "Alice", "Olivia", "Emma", "Sophia", "Ethan", "Liam", "Noah", "Logan",
    "Lucas", "Chloe", "Zoey", "Isla", "Mila", "Leah", "Daniel", "Owen",
    "Caleb", "Julian", "Adrian", "Felix", "Oscar", "Hugo", "Amelia", "Elena",
    "Wei", "Ming", "Xiaoyu", "Jun", "Hao", "Lei", "Yan", "Ting", "Jing",
    "Kai", "Rui", "Yue", "Zhen", "Xin", "Yun", "Qing", "Mei", "Hui",
    "Zihan", "Yuting", "Haoran", "Jiayi", "Zixuan", "Yichen", "Siyu", "Mingyu",
    "Priya", "Aarav", "Matteo", "Sofia", "Lukas", "Anika", "Tomas", "Ingrid",
    "Kenji", "Yuki",
]
SURNAMES = [
    "Chen", "Wang", "Zhang", "Liu", "Yang", "Huang", "Zhao", "Zhou", "Xu",
    "Sun", "Zhu", "Guo", "Lin", "Luo", "Gao", "Liang", "Song", "Tang", "Han",
    "Feng", "Deng", "Cao", "Peng", "Zeng", "Xiao", "Tian", "Dong", "Pan",
    "Yuan", "Cai", "Jiang", "Yu", "Du", "Ye", "Cheng", "Wei", "Su", "Lu",
    "Ding", "Shen", "Ren", "Yao", "Lu", "Jin", "Fan", "Fang", "Shi", "Tan",
    "Liao", "Zou", "Xiong", "Qiu", "Qin", "Hou", "Meng", "Long", "Duan",
    "Lei", "Bai", "Kong",
]
DISTRICTS = [
    "Haidian", "Chaoyang", "Dongcheng", "Xicheng", "Fengtai", "Shijingshan",
    "Tongzhou", "Shunyi", "Changping", "Daxing", "Fangshan", "Mentougou",
    "Huairou", "Pinggu", "Miyun", "Yanqing", "Pudong", "Xuhui", "Huangpu",
    "Minhang", "Baoshan", "Jiading", "Songjiang", "Qingpu", "Fengxian",
    "Hongkou", "Yangpu", "Putuo", "Changning", "Chongming", "Hongshan",
    "Wuchang", "Jiang'an", "Qiaokou", "Hanyang", "Qingshan", "Jiangxia",
    "Caidian", "Huangpi", "Xinzhou", "Tianhe", "Yuexiu", "Haizhu", "Liwan",
    "Baiyun", "Panyu", "Huadu", "Nansha", "Zengcheng", "Futian", "Luohu",
    "Nanshan", "Yantian", "Longgang", "Bao'an", "Longhua",
]
SCHOOL_STEMS = [
    "Riverside", "Lakeside", "Hillcrest", "Sunrise", "Greenfield", "Oakwood",
    "Maplewood", "Westbrook", "Eastgate", "Northfield", "Southview",
    "Brightwater", "Silverlake", "Redwood", "Pinecrest", "Cedarbrook",
    "Willowdale", "Stonebridge", "Fairview", "Clearwater", "Goldleaf",
    "Springdale", "Harborview", "Meadowbrook", "Ashford",
]


def person_entries():
    out = []
    for i, given in enumerate(GIVEN):
        full = f"{given} {SURNAMES[i]}"
        out.append({"canonical": full.lower(), "aliases": [full, given]})
    return out


def location_entries():
    out = []
    for d in DISTRICTS:
        canon = (d.replace("'", "") + " district").lower()
        out.append({"canonical": canon, "aliases": [f"{d} District", d]})
    return out


def school_entries():
    out = []
    for stem in SCHOOL_STEMS:
        for level in ("Middle School", "Primary School"):
            full = f"{stem} {level}"
            out.append({"canonical": full.lower(), "aliases": [full]})
    for city, n in (("Wuhan", 2), ("Beijing", 4), ("Shanghai", 3),
                    ("Guangzhou", 6), ("Shenzhen", 1)):
        full = f"{city} No. {n} Middle School"
        out.append({"canonical": f"{city.lower()} no {n} middle school",
                    "aliases": [full]})
    return out


def phone_digits(i):
    if i == 0:
        return "13800138000"
    state = 2862933555777941757 * (i + 17) + 3037000493
    tail = state % 10_000_000
    prefix = ["139", "186", "150", "177", "158", "135", "188"][i % 7]
    return f"{prefix}{i % 10}{tail:07d}"


def phone_entries():
    out = []
    for i in range(56):
        d = phone_digits(i)
        out.append({
            "canonical": d,
            "aliases": [
                f"{d[:3]}-{d[3:7]}-{d[7:]}",
                f"({d[:3]}) {d[3:7]}-{d[7:]}",
                f"{d[:3]} {d[3:7]} {d[7:]}",
                d,
            ],
        })
    return out


def contact_entries():
    out = []
    for i, given in enumerate(GIVEN[:56]):
        mail = f"{given.lower()}.{SURNAMES[i].lower()}@school.example.edu"
        out.append({"canonical": mail.replace(".", "").replace("@", ""),
                    "aliases": [mail]})
    return out


def id_entries():
    out = []
    for i in range(56):
        sid = f"S2023{i + 1:04d}"
        out.append({"canonical": sid[1:], "aliases": [sid]})
    return out


def main():
    gaz = {
        "PersonName": person_entries(),
        "Location": location_entries(),
        "PhoneNumber": phone_entries(),
        "SchoolName": school_entries(),
        "ContactOther": contact_entries(),
        "IdNumber": id_entries(),
    }
    (ROOT / "gazetteer.json").write_text(json.dumps(gaz, indent=1) + "\n")

    profiles = []
    for i in range(50):
        p, l, ph, s = (gaz["PersonName"][i], gaz["Location"][i],
                       gaz["PhoneNumber"][i], gaz["SchoolName"][i])
        profiles.append({"person_name": p, "location": l, "phone": ph, "school": s})
    (ROOT / "profiles.json").write_text(json.dumps(profiles, indent=1) + "\n")


if __name__ == "__main__":
    main()
