"""Regenerates the synthetic CSV fixtures. Output is fixed by the seed."""
import csv
import random
from pathlib import Path

HERE = Path(__file__).parent


def family_income(rng, rows=600):
    regions = ["NCR", "Ilocos", "Bicol", "Davao", "Caraga"]
    status = ["Married", "Single", "Widowed", "Divorced/Separated"]
    out = []
    for _ in range(rows):
        sex = "Male" if rng.random() < 0.7 else "Female"
        age = rng.randint(15, 95)
        size = rng.randint(1, 10)
        food = round(rng.uniform(20000, 200000), 0)
        income = round(food * rng.uniform(1.5, 4.0) + (25000 if sex == "Male" else 0) + 800 * min(age, 60), 0)
        out.append({
            "Total Household Income": income,
            "Region": rng.choice(regions),
            "Total Food Expenditure": food,
            "Household Head Sex": sex,
            "Household Head Age": age,
            "Household Head Marital Status": rng.choice(status),
            "Total Number of Family members": size,
        })
    # guarantee every (sex, bucket) arm is populated
    for sex in ["Male", "Female"]:
        for age in [20, 30, 50, 70, 90]:
            out.append(dict(out[0], **{"Household Head Sex": sex, "Household Head Age": age}))
    # rows the loader must drop
    out.append(dict(out[1], **{"Household Head Age": 5}))
    out.append(dict(out[2], **{"Household Head Age": 120}))
    out.append(dict(out[3], **{"Total Household Income": ""}))
    out.append(dict(out[4], **{"Region": "NA"}))
    return out


def compas(rng, rows=400):
    races = ["African-American", "Caucasian", "Hispanic", "Other"]
    ages = ["Less than 25", "25 - 45", "Greater than 45"]
    out = []
    for i in range(rows):
        out.append({
            "id": i + 1,
            "sex": rng.choice(["Male", "Female"]),
            "age_cat": ages[i % 3],
            "race": rng.choice(races),
            "priors_count": rng.randint(0, 20),
            "juv_fel_count": rng.randint(0, 3),
            "c_charge_degree": rng.choice(["F", "M"]),
            "v_decile_score": rng.randint(1, 10),
        })
    return out


def write(name, rows):
    with open(HERE / name, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    write("family_income.csv", family_income(random.Random(20190501)))
    write("compas.csv", compas(random.Random(7)))
