"""Rebuilds static_bundle.zip from static_bundle/ (images are regenerated)."""
import os
import zipfile

from PIL import Image, ImageDraw

HERE = os.path.dirname(os.path.abspath(__file__))
SRC = os.path.join(HERE, "static_bundle")

IMAGES = {
    "girl.jpg": ((500, 375), (90, 160, 70)),
    "drink.jpg": ((400, 300), (160, 120, 90)),
}


def make_images():
    os.makedirs(os.path.join(SRC, "images"), exist_ok=True)
    for name, (size, colour) in IMAGES.items():
        img = Image.new("RGB", size, colour)
        draw = ImageDraw.Draw(img)
        draw.rectangle([size[0] // 4, size[1] // 4, size[0] // 2, size[1] // 2], outline=(255, 255, 255))
        img.save(os.path.join(SRC, "images", name), quality=70)


def make_zip():
    out = os.path.join(HERE, "static_bundle.zip")
    with zipfile.ZipFile(out, "w", zipfile.ZIP_DEFLATED) as z:
        for rel in ["sentences.txt", "boxes.xml"] + ["images/" + n for n in sorted(IMAGES)]:
            info = zipfile.ZipInfo(rel, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            with open(os.path.join(SRC, rel), "rb") as f:
                z.writestr(info, f.read())


if __name__ == "__main__":
    make_images()
    make_zip()
