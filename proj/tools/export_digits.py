"""Export the 8x8 handwritten digits set to CSV: label followed by 64 intensities in 0..16."""
import csv
import sys

from sklearn.datasets import load_digits


def main(path):
    digits = load_digits()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for label, row in zip(digits.target, digits.data.astype(int)):
            writer.writerow([int(label), *row.tolist()])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/digits8x8.csv")
