"""
PSNR, SSIM and FSIM on a blur ladder
====================================
"""
from pathlib import Path

from deframe import conv_circular, load_image, psf_gaussian, quality_report

here = Path(__file__).resolve().parent
img = load_image(here.parent / "manifests" / "images" / "camera256.png")

print("sigma   psnr      ssim     fsim")
for sigma in (0.5, 1.0, 1.5, 2.0, 3.0):
    blurred = conv_circular(img, psf_gaussian(15, 15, sigma))
    rep = quality_report(blurred, img)
    print(f"{sigma:<6}", rep.csv_row().replace(",", "  "))

print("identity:", quality_report(img, img).csv_row())  # PSNR written as 999
